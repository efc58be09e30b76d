//! Brute-force density-matrix simulation of the four-step atomic walk.
//!
//! The walk is propagated on the full 9-site × 2-spin Hilbert space (the
//! reachable span of four steps on the half-lattice): each step applies the
//! balanced coin, dephases site coherences during the rest interval, then
//! dephases them through the spin-dependent displacement ramp and moves the
//! populations.  The ramp dephasing uses the time average of the positional
//! damping factor along the linearly growing branch separation, evaluated by
//! adaptive quadrature — no closed form is shared with the analytic
//! five-site probability vector this oracle validates.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::domain::{Error, ModificationParams, Result};
use crate::quad;
use crate::units;

/// Readout probabilities of the three walk protocols, plus the weight of
/// each postselected first-step branch at the projection point.
#[derive(Debug, Clone)]
pub struct WalkProbabilities {
    /// Five-site distribution without postselection.
    pub full: [f64; 5],
    /// Distribution after projecting the first step onto the left branch.
    pub postselect_left: [f64; 5],
    /// Distribution after projecting the first step onto the right branch.
    pub postselect_right: [f64; 5],
    /// Population of the kept branch just before renormalization (1/2 for
    /// the ideal walk; populations are untouched by dephasing).
    pub left_branch_weight: f64,
    /// Same for the right branch.
    pub right_branch_weight: f64,
}

/// Half-lattice span: positions −4..4 in units of d/2.
const N_POS: i32 = 9;
const OFF: i32 = 4;
const DIM: usize = (N_POS as usize) * 2;

fn idx(pos: i32, spin: usize) -> usize {
    ((pos + OFF) as usize) * 2 + spin
}

/// Spin-dependent displacement direction in units of d/2: up moves left.
fn dir(spin: usize) -> i32 {
    if spin == 0 {
        -1
    } else {
        1
    }
}

struct Walk {
    t_shift_s: f64,
    t_rest_s: f64,
    site_spacing_m: f64,
    sigma_q: f64,
    /// Modification rate seen by the atom: (m/m_e)² / τ_e, or 0 when τ_e = ∞.
    rate: f64,
    rho: DMatrix<Complex64>,
    /// Ramp-average cache keyed by branch separations in units of d/2.
    ramp_cache: HashMap<(i32, i32), f64>,
}

impl Walk {
    fn new(
        t_shift_s: f64,
        t_rest_s: f64,
        site_spacing_m: f64,
        atom_mass_kg: f64,
        params: &ModificationParams,
    ) -> Result<Self> {
        params.require_zero_sigma_s("walk oracle")?;
        let mut rho = DMatrix::<Complex64>::zeros(DIM, DIM);
        rho[(idx(0, 0), idx(0, 0))] = Complex64::new(1.0, 0.0); // origin, spin up
        let rate = if params.tau_e().is_infinite() {
            0.0
        } else {
            units::mass_ratio_sq(atom_mass_kg) / params.tau_e()
        };
        Ok(Self {
            t_shift_s,
            t_rest_s,
            site_spacing_m,
            sigma_q: params.sigma_q(),
            rate,
            rho,
            ramp_cache: HashMap::new(),
        })
    }

    /// Positional damping factor exp(−(sσ_q)²/2ħ²) at branch separation s.
    fn damping(&self, separation_m: f64) -> f64 {
        let y = separation_m * self.sigma_q / units::HBAR;
        (-0.5 * y * y).exp()
    }

    /// Time average of the damping factor while the separation ramps
    /// linearly from `k0·d/2` to `k1·d/2`, by adaptive quadrature.
    fn ramp_average(&mut self, k0: i32, k1: i32) -> Result<f64> {
        if let Some(&v) = self.ramp_cache.get(&(k0, k1)) {
            return Ok(v);
        }
        let s0 = f64::from(k0) * self.site_spacing_m / 2.0;
        let s1 = f64::from(k1) * self.site_spacing_m / 2.0;
        let v = if k0 == k1 {
            self.damping(s0)
        } else {
            let f = |u: f64| self.damping(s0 + (s1 - s0) * u);
            quad::integrate(&f, 0.0, 1.0, 1e-13)
                .map_err(|e| Error::Numerical(format!("walk ramp average: {e}")))?
        };
        self.ramp_cache.insert((k0, k1), v);
        Ok(v)
    }

    /// Balanced coin on every site: |↑⟩ → (|↑⟩ − |↓⟩)/√2, |↓⟩ → (|↑⟩ + |↓⟩)/√2.
    fn coin(&mut self) {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut u = DMatrix::<Complex64>::zeros(DIM, DIM);
        for p in -OFF..=OFF {
            u[(idx(p, 0), idx(p, 0))] = Complex64::new(inv, 0.0);
            u[(idx(p, 0), idx(p, 1))] = Complex64::new(-inv, 0.0);
            u[(idx(p, 1), idx(p, 0))] = Complex64::new(inv, 0.0);
            u[(idx(p, 1), idx(p, 1))] = Complex64::new(inv, 0.0);
        }
        self.rho = &u * &self.rho * u.adjoint();
    }

    /// Static dephasing of site coherences for a hold of duration `dt`.
    fn rest_decay(&mut self, dt: f64) {
        if self.rate == 0.0 {
            return;
        }
        for i in 0..DIM {
            for j in 0..DIM {
                let (pi, pj) = (i as i32 / 2 - OFF, j as i32 / 2 - OFF);
                let sep = f64::from((pi - pj).abs()) * self.site_spacing_m / 2.0;
                let deficit = 1.0 - self.damping(sep);
                self.rho[(i, j)] *= Complex64::new((-dt * self.rate * deficit).exp(), 0.0);
            }
        }
    }

    /// Ramp dephasing over the displacement interval, then the spin-dependent
    /// position shift.
    fn shift(&mut self) -> Result<()> {
        if self.rate != 0.0 {
            for i in 0..DIM {
                for j in 0..DIM {
                    if self.rho[(i, j)] == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let (pi, si) = (i as i32 / 2 - OFF, i % 2);
                    let (pj, sj) = (j as i32 / 2 - OFF, j % 2);
                    let k0 = pi - pj;
                    let k1 = k0 + dir(si) - dir(sj);
                    let avg = self.ramp_average(k0, k1)?;
                    self.rho[(i, j)] *=
                        Complex64::new((-self.t_shift_s * self.rate * (1.0 - avg)).exp(), 0.0);
                }
            }
        }
        let mut moved = DMatrix::<Complex64>::zeros(DIM, DIM);
        for i in 0..DIM {
            for j in 0..DIM {
                if self.rho[(i, j)] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (pi, si) = (i as i32 / 2 - OFF, i as usize % 2);
                let (pj, sj) = (j as i32 / 2 - OFF, j as usize % 2);
                moved[(idx(pi + dir(si), si), idx(pj + dir(sj), sj))] = self.rho[(i, j)];
            }
        }
        self.rho = moved;
        Ok(())
    }

    fn step(&mut self) -> Result<()> {
        self.coin();
        self.rest_decay(self.t_rest_s);
        self.shift()
    }

    /// Projects onto the given first-step branch position/spin, returning
    /// the branch population before renormalization.
    fn postselect(&mut self, pos: i32, spin: usize) -> f64 {
        let k = idx(pos, spin);
        let w = self.rho[(k, k)].re;
        let mut projected = DMatrix::<Complex64>::zeros(DIM, DIM);
        projected[(k, k)] = Complex64::new(1.0, 0.0);
        self.rho = projected;
        w
    }

    /// Reads the site distribution: diagonal populations at even positions,
    /// summed over spin.  Odd positions must be empty after four steps.
    fn readout(&self) -> Result<[f64; 5]> {
        let mut probs = [0.0_f64; 5];
        for p in -OFF..=OFF {
            let pop = self.rho[(idx(p, 0), idx(p, 0))].re + self.rho[(idx(p, 1), idx(p, 1))].re;
            if p % 2 == 0 {
                probs[(p / 2 + 2) as usize] = pop;
            } else if pop.abs() > 1e-12 {
                return Err(Error::Numerical(format!(
                    "walk oracle: population {pop:e} at odd position {p} at readout"
                )));
            }
        }
        Ok(probs)
    }
}

/// Simulates the four-step walk exactly on the 9-site × 2-spin density
/// matrix and returns the five-site readout distributions of the full
/// protocol and of both first-step postselections.
///
/// # Errors
///
/// [`Error::Config`] if the modification carries a nonzero displacement
/// scale (the walk models only the momentum channel); [`Error::Numerical`]
/// if the ramp quadrature fails or populations leak to odd sites.
pub fn qrw_density_matrix_walk(
    t_shift_s: f64,
    t_rest_s: f64,
    site_spacing_m: f64,
    atom_mass_kg: f64,
    params: &ModificationParams,
) -> Result<WalkProbabilities> {
    let run_full = |_: ()| -> Result<[f64; 5]> {
        let mut w = Walk::new(t_shift_s, t_rest_s, site_spacing_m, atom_mass_kg, params)?;
        for _ in 0..4 {
            w.step()?;
        }
        w.readout()
    };
    let run_post = |pos: i32, spin: usize| -> Result<([f64; 5], f64)> {
        let mut w = Walk::new(t_shift_s, t_rest_s, site_spacing_m, atom_mass_kg, params)?;
        w.step()?;
        let weight = w.postselect(pos, spin);
        for _ in 0..3 {
            w.step()?;
        }
        Ok((w.readout()?, weight))
    };
    let full = run_full(())?;
    let (postselect_left, left_branch_weight) = run_post(-1, 0)?;
    let (postselect_right, right_branch_weight) = run_post(1, 1)?;
    Ok(WalkProbabilities {
        full,
        postselect_left,
        postselect_right,
        left_branch_weight,
        right_branch_weight,
    })
}
