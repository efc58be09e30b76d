//! Phase-space quadrature of the two-phonon coincidence probabilities.
//!
//! The single-excitation entangled state of the two flexural modes is
//! represented by its Wigner characteristic function (a Gaussian times a
//! polynomial in the four quadratures).  Free evolution rotates each mode's
//! quadratures at its own frequency, the classicalizing channel multiplies
//! the characteristic function by a time-averaged Gaussian damping envelope,
//! and the four joint click probabilities are phase-space overlaps with the
//! ± detection projectors.  The 4-D integral is evaluated on a tensor
//! Gauss–Hermite grid, independently of the closed-form likelihood.

use crate::domain::{Error, ModificationParams, Result};
use crate::oracle::geom;
use crate::quad;
use crate::units;

/// Physical description of the nanobeam pair as the oracle needs it: mode
/// frequencies, effective mass, and the geometry determining the coupling
/// strength U(σ_q).
#[derive(Debug, Clone)]
pub struct CharFnSetup {
    /// Mean angular frequency Ω of the two flexural modes, rad/s.
    pub omega_rad_per_s: f64,
    /// Frequency splitting ΔΩ between the modes, rad/s.
    pub delta_omega_rad_per_s: f64,
    /// Effective mass of one mode, kg.
    pub eff_mass_kg: f64,
    /// Transverse mode width, m.
    pub lx_m: f64,
    /// Flexural half-wavelength, m.
    pub lz_m: f64,
    /// Material mass density, kg/m³.
    pub density_kg_m3: f64,
    /// Number of atoms participating in the mode.
    pub n_atoms: f64,
    /// Mass of one lattice atom, kg.
    pub atom_mass_kg: f64,
    /// Bond-momentum cutoff q_c, kg·m/s.
    pub cutoff_momentum: f64,
    /// Coherence length ħ/σ_q below which the discrete-atom coupling
    /// applies instead of the continuum mode integral.
    pub atomic_switch_m: f64,
}

impl CharFnSetup {
    /// Coupling strength U(σ_q) by defining-integral quadrature, picking the
    /// continuum or discrete-atom branch by coherence length.
    fn u_quadrature(&self, sigma_q: f64) -> Result<f64> {
        if units::HBAR / sigma_q >= self.atomic_switch_m {
            geom::continuum_u_quadrature(self.lx_m, self.lz_m, self.density_kg_m3, sigma_q)
        } else {
            geom::atomic_u_quadrature(
                self.n_atoms,
                self.atom_mass_kg,
                self.cutoff_momentum,
                sigma_q,
            )
        }
    }
}

/// Raw tensor-grid evaluation at a fixed node count.  Outcome order:
/// (+,+), (+,−), (−,+), (−,−).
fn char_probs(
    eps1: f64,
    eps2: f64,
    angle1: f64,
    angle2: f64,
    theta: f64,
    nodes: usize,
) -> [f64; 4] {
    let (xs, ws) = quad::gauss_hermite(nodes);
    let (s1, c1) = angle1.sin_cos();
    let (s2, c2) = angle2.sin_cos();
    let (th_s, th_c) = theta.sin_cos();

    // precompute the second mode's grid
    struct Axis2 {
        u2: f64,
        v2: f64,
        u2t: f64,
        v2t: f64,
        wd2: f64,
    }
    let mut grid2 = Vec::with_capacity(nodes * nodes);
    for (j, &u2) in xs.iter().enumerate() {
        for (l, &v2) in xs.iter().enumerate() {
            grid2.push(Axis2 {
                u2,
                v2,
                u2t: c2 * u2 - s2 * v2,
                v2t: c2 * v2 + s2 * u2,
                wd2: ws[j] * ws[l] * (-eps2 * (u2 * u2 + v2 * v2)).exp(),
            });
        }
    }

    let mut acc = [0.0_f64; 4];
    for (i, &u1) in xs.iter().enumerate() {
        for (k, &v1) in xs.iter().enumerate() {
            let wd1 = ws[i] * ws[k] * (-eps1 * (u1 * u1 + v1 * v1)).exp();
            let u1t = c1 * u1 - s1 * v1;
            let v1t = c1 * v1 + s1 * u1;
            for g in &grid2 {
                let w = wd1 * g.wd2;
                let cross = th_c * 2.0 * (v1 * g.v2 + u1 * g.u2)
                    + th_s * 2.0 * (v1 * g.u2 - g.v2 * u1);
                let sp = ((g.v2t + v1t).powi(2) + (g.u2t + u1t).powi(2)) / 2.0;
                let sm = ((g.v2t - v1t).powi(2) + (g.u2t - u1t).powi(2)) / 2.0;
                let (ap, am) = (1.0 - sp, 1.0 - sm);
                let (bp, bm) = (1.0 + cross, 1.0 - cross);
                acc[0] += w * ap * bp;
                acc[1] += w * ap * bm;
                acc[2] += w * am * bp;
                acc[3] += w * am * bm;
            }
        }
    }
    let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    let mut p = [0.0_f64; 4];
    for (o, a) in p.iter_mut().zip(acc.iter()) {
        *o = 0.25 - a / four_pi_sq;
    }
    let total: f64 = p.iter().sum();
    p.map(|v| v / total)
}

/// Coincidence probabilities for the φ = 0 two-mode single-phonon state
/// after free evolution for `t_s` and classicalizing damping, detected along
/// the θ quadrature: outcome order (+,+), (+,−), (−,+), (−,−).
///
/// Runs the tensor quadrature at `nodes` and `2·nodes` points per axis and
/// fails if the two disagree, so a returned value is converged.
///
/// # Errors
///
/// [`Error::Numerical`] when node doubling moves any probability by more
/// than 1e-4 (non-convergent quadrature) or the coupling-strength quadrature
/// fails; [`Error::Config`] for a nonzero displacement scale or fewer than
/// 8 nodes.
pub fn nanobeam_char_quadrature(
    setup: &CharFnSetup,
    params: &ModificationParams,
    theta: f64,
    t_s: f64,
    nodes: usize,
) -> Result<[f64; 4]> {
    params.require_zero_sigma_s("characteristic-function oracle")?;
    if nodes < 8 {
        return Err(Error::Config(format!(
            "characteristic-function oracle needs ≥ 8 nodes per axis, got {nodes}"
        )));
    }
    let o1 = setup.omega_rad_per_s - setup.delta_omega_rad_per_s / 2.0;
    let o2 = setup.omega_rad_per_s + setup.delta_omega_rad_per_s / 2.0;
    let (eps1, eps2) = if params.tau_e().is_infinite() {
        (0.0, 0.0)
    } else {
        let u = setup.u_quadrature(params.sigma_q())?;
        let xi1 = 2.0 * u * units::HBAR / (setup.eff_mass_kg * o1);
        let xi2 = 2.0 * u * units::HBAR / (setup.eff_mass_kg * o2);
        (
            xi1 * t_s / (2.0 * params.tau_e()),
            xi2 * t_s / (2.0 * params.tau_e()),
        )
    };
    let coarse = char_probs(eps1, eps2, o1 * t_s, o2 * t_s, theta, nodes);
    let fine = char_probs(eps1, eps2, o1 * t_s, o2 * t_s, theta, 2 * nodes);
    let drift = coarse
        .iter()
        .zip(fine.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    if drift > 1e-4 {
        return Err(Error::Numerical(format!(
            "characteristic-function quadrature not converged: node doubling \
             moved a probability by {drift:e}"
        )));
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> CharFnSetup {
        let omega = 2.0 * std::f64::consts::PI * 5e9;
        let sound = 8433.0;
        let lz = std::f64::consts::PI * sound / omega;
        let eff_mass = 9e-17;
        CharFnSetup {
            omega_rad_per_s: omega,
            delta_omega_rad_per_s: 2.0 * std::f64::consts::PI * 4.5e7,
            eff_mass_kg: eff_mass,
            lx_m: (2.0 * eff_mass / (2300.0 * lz)).sqrt(),
            lz_m: lz,
            density_kg_m3: 2300.0,
            n_atoms: eff_mass / units::M_SILICON,
            atom_mass_kg: units::M_SILICON,
            cutoff_momentum: (2.0 * units::M_SILICON * 4.6 * units::EV).sqrt(),
            atomic_switch_m: 5e-10,
        }
    }

    #[test]
    fn undamped_state_shows_the_ideal_quadrature_correlations() {
        let s = setup();
        let params = ModificationParams::new(f64::INFINITY, 1e-22, 0.0).unwrap();
        let theta = 0.7;
        let t = 123e-9;
        let p = nanobeam_char_quadrature(&s, &params, theta, t, 8).unwrap();
        // ideal single-phonon Bell state: P(s1,s2) = (1 + s1·s2·cos(θ − ΔΩt))/4
        let a = theta - s.delta_omega_rad_per_s * t;
        for (k, (sg1, sg2)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .enumerate()
        {
            let ideal = (1.0 + sg1 * sg2 * a.cos()) / 4.0;
            assert!(
                (p[k] - ideal).abs() < 1e-10,
                "outcome {k}: {} vs {ideal}",
                p[k]
            );
        }
    }

    #[test]
    fn damped_probabilities_are_sign_flip_symmetric_and_normalized() {
        let s = setup();
        let qc = s.cutoff_momentum;
        // pick τ_e so the damping exponent is order-one at the readout time
        let params = ModificationParams::new(1e7, qc, 0.0).unwrap();
        let p = nanobeam_char_quadrature(&s, &params, 1.1, 123e-9, 12).unwrap();
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!((p[0] - p[3]).abs() < 1e-10, "++ vs --: {} {}", p[0], p[3]);
        assert!((p[1] - p[2]).abs() < 1e-10, "+- vs -+: {} {}", p[1], p[2]);
    }

    #[test]
    fn rejects_displacement_modifications_and_tiny_grids() {
        let s = setup();
        let with_disp = ModificationParams::new(1e7, 1e-22, 1e-11).unwrap();
        assert!(nanobeam_char_quadrature(&s, &with_disp, 0.3, 1e-7, 8).is_err());
        let ok = ModificationParams::new(1e7, 1e-22, 0.0).unwrap();
        assert!(nanobeam_char_quadrature(&s, &ok, 0.3, 1e-7, 4).is_err());
    }
}
