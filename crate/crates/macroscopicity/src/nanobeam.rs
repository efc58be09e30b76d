//! Two-mode nanobeam phonon interferometry under a classicalizing
//! momentum-diffusion channel.
//!
//! A single phonon is shared between two near-degenerate flexural modes of
//! a pair of nanobeams (frequencies Ω ± ΔΩ/2) and read out by quadrature
//! detection at angle θ, giving four coincidence outcomes (±, ±).  The
//! momentum-diffusion channel damps each mode's single-phonon coherence at
//! a rate ξ/τ_e, where the geometric factor U(σ_q) averages the squared
//! kick overlap over the beam's strain field:
//!
//! * continuum regime (coherence length above the lattice scale):
//!   U = 8ϱ²L_z⁴ G(α)² I(β)/m_e² with α = L_x σ_q/ħ, β = L_z σ_q/ħ,
//! * discrete-atom regime: a radial Gaussian moment of the per-atom recoil
//!   cut off at the bond momentum q_c.
//!
//! The four coincidence probabilities, post-selected on both detectors
//! firing, have the closed form (x = ξt/τ_e, A = θ − ΔΩt − φ)
//!
//! ```text
//! P(s₁,s₂) ∝ 1/4 + [4 s₁s₂ cos A − 2x − x²] / (2+x)⁴
//! ```
//!
//! normalized by the coincidence survival 𝒩 = 1 − (8x + 4x²)/(2+x)⁴.

use std::fmt;
use std::sync::Mutex;

use errorfunctions::{ComplexErrorFunctions, RealErrorFunctions};
use num_complex::Complex64;

use crate::domain::{
    Dataset, Error, ExperimentModel, ModificationParams, OutcomeSpace, Result, Run,
};
use crate::quad;
use crate::rng::SeededRng;
use crate::units::{HBAR, M_E, M_SILICON};

const PI: f64 = std::f64::consts::PI;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Experimental configuration of the nanobeam phonon pair.
#[derive(Debug, Clone)]
pub struct NanobeamParams {
    /// Mean angular frequency Ω of the two flexural modes, rad/s.
    pub omega_rad_per_s: f64,
    /// Frequency splitting ΔΩ, rad/s.
    pub delta_omega_rad_per_s: f64,
    /// Effective mass of one mode, kg.
    pub eff_mass_kg: f64,
    /// Speed of sound in the beam material, m/s (sets the flexural
    /// half-wavelength L_z = πv/Ω).
    pub sound_speed_m_per_s: f64,
    /// Material mass density, kg/m³.
    pub density_kg_m3: f64,
    /// Lattice bond energy, J (sets the bond momentum q_c = √(2mE_b)).
    pub bond_energy_j: f64,
    /// Mass of one lattice atom, kg.
    pub atom_mass_kg: f64,
    /// Interferometer phase offset φ in A = θ − ΔΩt − φ, rad.
    pub readout_phase_rad: f64,
    /// Coherence length ħ/σ_q below which the discrete-atom coupling
    /// replaces the continuum mode integral, m.
    pub atomic_switch_m: f64,
}

impl Default for NanobeamParams {
    /// The shipped silicon nanobeam pair: 5 GHz flexural modes split by
    /// 45 MHz, 90 fg effective mass, and a phase offset calibrated so the
    /// phase scan at the first readout time is centred on its fringe.
    fn default() -> Self {
        let delta_omega = 2.0 * PI * 4.5e7;
        Self {
            omega_rad_per_s: 2.0 * PI * 5.0e9,
            delta_omega_rad_per_s: delta_omega,
            eff_mass_kg: 9.0e-17,
            sound_speed_m_per_s: 8433.0,
            density_kg_m3: 2300.0,
            bond_energy_j: 4.6 * crate::units::EV,
            atom_mass_kg: M_SILICON,
            readout_phase_rad: 1.8 - delta_omega * 123e-9,
            atomic_switch_m: 5e-10,
        }
    }
}

/// One coincidence outcome: the signs of the two quadrature detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoincidenceOutcome {
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl CoincidenceOutcome {
    /// All four outcomes in likelihood order.
    pub const ALL: [Self; 4] = [
        Self::PlusPlus,
        Self::PlusMinus,
        Self::MinusPlus,
        Self::MinusMinus,
    ];

    /// Position in the probability vector.
    #[must_use]
    pub fn index(self) -> usize {
        match self {
            Self::PlusPlus => 0,
            Self::PlusMinus => 1,
            Self::MinusPlus => 2,
            Self::MinusMinus => 3,
        }
    }

    /// Detector signs (s₁, s₂).
    #[must_use]
    pub fn signs(self) -> (i8, i8) {
        match self {
            Self::PlusPlus => (1, 1),
            Self::PlusMinus => (1, -1),
            Self::MinusPlus => (-1, 1),
            Self::MinusMinus => (-1, -1),
        }
    }

    /// Short label, e.g. `++`.
    #[must_use]
    pub fn label(self) -> &'static str {
        match self {
            Self::PlusPlus => "++",
            Self::PlusMinus => "+-",
            Self::MinusPlus => "-+",
            Self::MinusMinus => "--",
        }
    }

    /// Parses `++`/`+-`/`-+`/`--` or the letter forms `pp`/`pm`/`mp`/`mm`.
    ///
    /// # Errors
    ///
    /// [`Error::Data`] for anything else.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "++" | "pp" => Ok(Self::PlusPlus),
            "+-" | "pm" => Ok(Self::PlusMinus),
            "-+" | "mp" => Ok(Self::MinusPlus),
            "--" | "mm" => Ok(Self::MinusMinus),
            other => Err(Error::Data(format!(
                "unknown coincidence outcome {other:?} (expected ++, +-, -+, -- \
                 or pp, pm, mp, mm)"
            ))),
        }
    }
}

impl fmt::Display for CoincidenceOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Measurement context of one coincidence run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NanobeamContext {
    /// Detection quadrature angle θ, rad.
    pub theta_rad: f64,
    /// Free-evolution time before readout, s.
    pub t_s: f64,
}

// ---- axial overlap integral I(β) -------------------------------------------
//
// I(β) = ∫ φ(u) u⁴ cos²(βu/2) / (π² − β²u²)² du with standard normal φ.
// Three regimes: a moment series for small β, a Faddeeva-function closed
// form at moderate β, and direct panel quadrature when the integrand
// oscillates too fast for the closed form's cancellations.

/// ∫φ(u) u^{2n} cos(bu) du for n = 0..count: g₀ = e^{−b²/2} and
/// g_{n+1} = −g_n''(b), carried as polynomials p_n with g_n = e^{−b²/2}p_n(b).
fn gaussian_cos_moments(b: f64, count: usize) -> Vec<f64> {
    let gauss = (-0.5 * b * b).exp();
    let mut p: Vec<f64> = vec![1.0];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let val = p.iter().rev().fold(0.0, |acc, &c| acc * b + c);
        out.push(gauss * val);
        // p_{n+1} = −[(b² − 1)p − 2b p' + p'']
        let dp: Vec<f64> = p
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
        let ddp: Vec<f64> = dp
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
        let mut next = vec![0.0; p.len() + 2];
        for (i, &c) in p.iter().enumerate() {
            next[i + 2] += c;
            next[i] -= c;
        }
        for (i, &c) in dp.iter().enumerate() {
            next[i + 1] -= 2.0 * c;
        }
        for (i, &c) in ddp.iter().enumerate() {
            next[i] += c;
        }
        for v in &mut next {
            *v = -*v;
        }
        p = next;
    }
    out
}

/// Small-β branch: expand (π² − β²u²)^{−2} = π^{−4} Σ (j+1)(βu/π)^{2j},
/// turning I into a series of Gaussian cosine moments.
fn axial_integral_series(beta: f64) -> f64 {
    const NMAX: usize = 60;
    let g = gaussian_cos_moments(beta, NMAX + 3);
    let ratio = (beta / PI).powi(2);
    let pi4 = PI.powi(4);
    let mut total = 0.0;
    let mut pow = 1.0;
    let mut dfact = 3.0; // (2n−1)!! at n = 2
    for j in 0..NMAX {
        let n = j + 2;
        let moment = 0.5 * (dfact + g[n]);
        let term = (j as f64 + 1.0) * pow * moment / pi4;
        total += term;
        if term.abs() < 1e-17 * total.abs() {
            break;
        }
        pow *= ratio;
        dfact *= (2 * (n + 1) - 1) as f64;
    }
    total
}

/// Φ(k, c) = i√(π/2)[e^{−k²/2} w((ik−c)/√2) − e^{−c²/2} e^{ick}] and its
/// c-derivative, the Hilbert-transform building blocks of the pole moments.
fn pole_moment_blocks(k: f64, c: f64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let pref = i * (PI / 2.0).sqrt();
    let z = (i * k - c) / SQRT_2;
    let wz = z.w();
    let ek = (-0.5 * k * k).exp();
    let ec = (-0.5 * c * c).exp();
    let eick = (i * (c * k)).exp();
    let phi = pref * (ek * wz - ec * eick);
    let wprime = -2.0 * z * wz + i * 2.0 / PI.sqrt();
    let dphi = pref * (ek * wprime * (-1.0 / SQRT_2) - ec * eick * Complex64::new(-c, k));
    (phi, dphi)
}

/// Moderate-β branch: partial fractions in (c² − u²)² with c = π/β reduce
/// I to first and second pole moments, expressed through the Faddeeva
/// function.
fn axial_integral_wform(beta: f64) -> f64 {
    let c = PI / beta;
    let s0 = 1.0 + (-0.5 * beta * beta).exp();
    let (p0, d0) = pole_moment_blocks(0.0, c);
    let (pb, db) = pole_moment_blocks(beta, c);
    let re_sum = p0.re + pb.re;
    let m1 = re_sum / c;
    let dm1 = -re_sum / (c * c) + (d0.re + db.re) / c;
    let m2 = -dm1 / (2.0 * c);
    (0.5 * s0 - c * c * m1 + 0.5 * c.powi(4) * m2) / beta.powi(4)
}

/// Fast-oscillation branch: direct quadrature on panels no wider than half
/// an oscillation period.  The double pole at u = π/β is cancelled by the
/// double zero of cos²(βu/2) there (removable); a node landing exactly on
/// it is nudged off.
fn axial_integral_quadrature(beta: f64) -> Result<f64> {
    let c = PI / beta;
    let inv_sqrt_2pi = 1.0 / (2.0 * PI).sqrt();
    let f = |u: f64| {
        let mut u = u;
        let mut den = PI * PI - beta * beta * u * u;
        if den.abs() < 1e-12 {
            u += 1e-7;
            den = PI * PI - beta * beta * u * u;
        }
        let cs = (0.5 * beta * u).cos();
        (-0.5 * u * u).exp() * inv_sqrt_2pi * u.powi(4) * cs * cs / (den * den)
    };
    let lim = 12.0;
    let width = (PI / beta).min(1.0);
    let n = ((2.0 * lim) / width).ceil() as usize;
    let mut edges: Vec<f64> = (0..=n)
        .map(|i| -lim + 2.0 * lim * i as f64 / n as f64)
        .collect();
    edges.push(-c);
    edges.push(c);
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    // large-β magnitude is ~1/(2β⁴); resolve it to 1e-9 relative
    let tol_each = 1e-9 * 0.5 / beta.powi(4) / n as f64;
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += quad::integrate(&f, w[0], w[1], tol_each).map_err(|e| {
            Error::Numerical(format!("axial overlap quadrature at beta = {beta}: {e}"))
        })?;
    }
    Ok(total)
}

/// I(β) with the branch chosen by oscillation count.
fn axial_integral(beta: f64) -> Result<f64> {
    if beta < 0.3 {
        Ok(axial_integral_series(beta))
    } else if beta <= 20.0 {
        Ok(axial_integral_wform(beta))
    } else {
        axial_integral_quadrature(beta)
    }
}

/// Transverse overlap factor G(a) = e^{−a²/2} − 1 + √(π/2)·a·erf(a/√2).
fn transverse_factor(a: f64) -> f64 {
    (-0.5 * a * a).exp_m1() + (PI / 2.0).sqrt() * a * (a / SQRT_2).erf()
}

/// The nanobeam pair as a Bayesian experiment model.
#[derive(Debug)]
pub struct NanobeamModel {
    params: NanobeamParams,
    /// Flexural half-wavelength L_z = πv/Ω, m.
    lz_m: f64,
    /// Transverse mode width L_x = √(2M/(ϱL_z)), m.
    lx_m: f64,
    /// Atom count N = M/m_atom.
    n_atoms: f64,
    /// Bond momentum q_c = √(2 m_atom E_b), kg·m/s.
    cutoff_momentum: f64,
    /// Most recent (σ_q, ξ) pair; scans evaluate many τ_e at one σ_q.
    xi_cache: Mutex<Option<(f64, f64)>>,
}

impl NanobeamModel {
    /// Validates the configuration and precomputes the derived geometry.
    ///
    /// # Errors
    ///
    /// [`Error::Config`] for non-positive scales or a mode splitting at or
    /// above the carrier frequency.
    pub fn new(params: NanobeamParams) -> Result<Self> {
        for (name, v) in [
            ("omega", params.omega_rad_per_s),
            ("delta_omega", params.delta_omega_rad_per_s),
            ("effective mass", params.eff_mass_kg),
            ("sound speed", params.sound_speed_m_per_s),
            ("density", params.density_kg_m3),
            ("bond energy", params.bond_energy_j),
            ("atom mass", params.atom_mass_kg),
            ("atomic switch length", params.atomic_switch_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "nanobeam {name} must be positive and finite, got {v}"
                )));
            }
        }
        if params.delta_omega_rad_per_s >= params.omega_rad_per_s {
            return Err(Error::Config(format!(
                "mode splitting {} rad/s must lie below the carrier {} rad/s",
                params.delta_omega_rad_per_s, params.omega_rad_per_s
            )));
        }
        if !params.readout_phase_rad.is_finite() {
            return Err(Error::Config(format!(
                "readout phase must be finite, got {}",
                params.readout_phase_rad
            )));
        }
        let lz_m = PI * params.sound_speed_m_per_s / params.omega_rad_per_s;
        let lx_m = (2.0 * params.eff_mass_kg / (params.density_kg_m3 * lz_m)).sqrt();
        let n_atoms = params.eff_mass_kg / params.atom_mass_kg;
        let cutoff_momentum = (2.0 * params.atom_mass_kg * params.bond_energy_j).sqrt();
        Ok(Self {
            params,
            lz_m,
            lx_m,
            n_atoms,
            cutoff_momentum,
            xi_cache: Mutex::new(None),
        })
    }

    #[must_use]
    pub fn params(&self) -> &NanobeamParams {
        &self.params
    }

    /// Flexural half-wavelength L_z, m.
    #[must_use]
    pub fn flexural_half_wavelength(&self) -> f64 {
        self.lz_m
    }

    /// Transverse mode width L_x, m.
    #[must_use]
    pub fn transverse_width(&self) -> f64 {
        self.lx_m
    }

    /// Bond momentum cutoff q_c, kg·m/s.
    #[must_use]
    pub fn bond_momentum(&self) -> f64 {
        self.cutoff_momentum
    }

    /// Number of lattice atoms in the mode.
    #[must_use]
    pub fn atom_count(&self) -> f64 {
        self.n_atoms
    }

    /// Geometric coupling factor U(σ_q) in 1/m², choosing the continuum or
    /// discrete-atom branch by coherence length.
    ///
    /// # Errors
    ///
    /// [`Error::Config`] for a non-positive σ_q; [`Error::Numerical`] if
    /// the fast-oscillation quadrature branch fails.
    pub fn geometric_factor(&self, sigma_q: f64) -> Result<f64> {
        if !(sigma_q > 0.0) || !sigma_q.is_finite() {
            return Err(Error::Config(format!(
                "sigma_q must be positive and finite, got {sigma_q}"
            )));
        }
        if HBAR / sigma_q >= self.params.atomic_switch_m {
            let alpha = self.lx_m * sigma_q / HBAR;
            let beta = self.lz_m * sigma_q / HBAR;
            let g = transverse_factor(alpha);
            let i_ax = axial_integral(beta)?;
            Ok(8.0 * self.params.density_kg_m3.powi(2) * self.lz_m.powi(4) * g * g * i_ax
                / (M_E * M_E))
        } else {
            let qc = self.cutoff_momentum;
            let r = qc / sigma_q;
            let bracket = 3.0 * sigma_q * sigma_q * (r / SQRT_2).erf()
                - (2.0 / PI).sqrt() * sigma_q * qc * (3.0 + r * r) * (-0.5 * r * r).exp();
            let ratio = self.params.atom_mass_kg / M_E;
            Ok(self.n_atoms * ratio * ratio / (12.0 * HBAR * HBAR) * bracket)
        }
    }

    /// Single-phonon coherence decay scale ξ(σ_q) = 2U ħ/(MΩ), so the
    /// decoherence exponent after time t is ξt/τ_e.
    ///
    /// # Errors
    ///
    /// As for [`Self::geometric_factor`].
    pub fn coupling_rate(&self, sigma_q: f64) -> Result<f64> {
        {
            let cache = self.xi_cache.lock().expect("xi cache poisoned");
            if let Some((sq, xi)) = *cache {
                if sq == sigma_q {
                    return Ok(xi);
                }
            }
        }
        let u = self.geometric_factor(sigma_q)?;
        let xi = 2.0 * u * HBAR / (self.params.eff_mass_kg * self.params.omega_rad_per_s);
        *self.xi_cache.lock().expect("xi cache poisoned") = Some((sigma_q, xi));
        Ok(xi)
    }

    /// The four coincidence probabilities at one context, post-selected on
    /// both detectors firing, in [`CoincidenceOutcome::ALL`] order.
    ///
    /// The first three come from the closed form; the fourth takes the
    /// slack 1 − (p₀ + p₁ + p₂), which is exact by Sterbenz's lemma for a
    /// partial sum in [1/2, 2], so the four values sum to 1.0 exactly.
    ///
    /// # Errors
    ///
    /// [`Error::Config`] for a nonzero displacement scale or an invalid
    /// context.
    pub fn coincidence_probabilities(
        &self,
        context: &NanobeamContext,
        params: &ModificationParams,
    ) -> Result<[f64; 4]> {
        params.require_zero_sigma_s(self.name())?;
        if !(context.t_s >= 0.0) || !context.t_s.is_finite() {
            return Err(Error::Config(format!(
                "readout time must be >= 0 s, got {}",
                context.t_s
            )));
        }
        if !context.theta_rad.is_finite() {
            return Err(Error::Config(format!(
                "detection angle must be finite, got {}",
                context.theta_rad
            )));
        }
        let x = if params.tau_e().is_infinite() {
            0.0
        } else {
            self.coupling_rate(params.sigma_q())? * context.t_s / params.tau_e()
        };
        let a = context.theta_rad
            - self.params.delta_omega_rad_per_s * context.t_s
            - self.params.readout_phase_rad;
        let den = (2.0 + x).powi(4);
        let cterm = 4.0 * a.cos() / den;
        let off = (2.0 * x + x * x) / den;
        let norm = 1.0 - (8.0 * x + 4.0 * x * x) / den;
        let pp = ((0.25 + cterm - off) / norm).max(0.0);
        let pm = ((0.25 - cterm - off) / norm).max(0.0);
        let mp = pm;
        let mm = 1.0 - (pp + pm + mp);
        Ok([pp, pm, mp, mm])
    }

    /// The shipped coincidence campaign: a 16-point detection-phase scan at
    /// the first readout time and a 16-point readout-time scan at θ = 0,
    /// as (name, design) pairs whose weights are the shot counts.
    #[must_use]
    pub fn default_protocols(&self) -> Vec<(String, Vec<(NanobeamContext, f64)>)> {
        let t0 = 123e-9;
        let t1 = 345e-9;
        let phase: Vec<(NanobeamContext, f64)> = (0..16)
            .map(|j| {
                (
                    NanobeamContext {
                        theta_rad: 2.0 * PI * f64::from(j) / 16.0,
                        t_s: t0,
                    },
                    250.0,
                )
            })
            .collect();
        let time: Vec<(NanobeamContext, f64)> = (0..16)
            .map(|j| {
                (
                    NanobeamContext {
                        theta_rad: 0.0,
                        t_s: t0 + (t1 - t0) * f64::from(j) / 15.0,
                    },
                    125.0,
                )
            })
            .collect();
        vec![
            ("phase-scan".to_string(), phase),
            ("time-scan".to_string(), time),
        ]
    }

    /// Draws multinomial coincidence counts for each context of a protocol
    /// (weights are the shot counts) and returns them as weighted runs;
    /// outcomes with zero counts are omitted.
    ///
    /// # Errors
    ///
    /// [`Error::Config`] for invalid modification parameters, an empty
    /// protocol, or a non-integer shot count.
    pub fn simulate_coincidences(
        &self,
        modification: &ModificationParams,
        protocol: &[(NanobeamContext, f64)],
        seed: u64,
    ) -> Result<Dataset<CoincidenceOutcome, NanobeamContext>> {
        if protocol.is_empty() {
            return Err(Error::Config("simulation needs at least one context".into()));
        }
        let mut rng = SeededRng::new(seed);
        let mut runs = Vec::new();
        for (ctx, shots) in protocol {
            if !(*shots >= 1.0) || shots.fract() != 0.0 {
                return Err(Error::Config(format!(
                    "shot count must be a positive integer, got {shots}"
                )));
            }
            let probs = self.coincidence_probabilities(ctx, modification)?;
            let counts = rng.multinomial(*shots as u64, &probs);
            for (outcome, &count) in CoincidenceOutcome::ALL.iter().zip(&counts) {
                if count > 0 {
                    runs.push(Run::with_weight(*outcome, *ctx, count)?);
                }
            }
        }
        Ok(Dataset::new("nanobeam", runs))
    }
}

impl ExperimentModel for NanobeamModel {
    type Outcome = CoincidenceOutcome;
    type Context = NanobeamContext;

    fn name(&self) -> &str {
        "nanobeam"
    }

    fn outcome_space(&self, _context: &NanobeamContext) -> OutcomeSpace<CoincidenceOutcome> {
        OutcomeSpace::Discrete(CoincidenceOutcome::ALL.to_vec())
    }

    fn log_likelihood(
        &self,
        outcome: &CoincidenceOutcome,
        context: &NanobeamContext,
        params: &ModificationParams,
    ) -> Result<f64> {
        let p = self.coincidence_probabilities(context, params)?[outcome.index()];
        if p > 0.0 {
            Ok(p.ln())
        } else {
            Ok(f64::NEG_INFINITY)
        }
    }

    fn expectation(
        &self,
        context: &NanobeamContext,
        params: &ModificationParams,
        g: &dyn Fn(&CoincidenceOutcome) -> f64,
        _abs_tol: f64,
    ) -> Result<f64> {
        let probs = self.coincidence_probabilities(context, params)?;
        Ok(CoincidenceOutcome::ALL
            .iter()
            .zip(&probs)
            .map(|(o, &p)| p * g(o))
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{
        atomic_u_quadrature, continuum_u_quadrature, nanobeam_char_quadrature, CharFnSetup,
    };

    fn model() -> NanobeamModel {
        NanobeamModel::new(NanobeamParams::default()).unwrap()
    }

    #[test]
    fn derived_geometry_matches_reference_values() {
        let m = model();
        assert!((m.flexural_half_wavelength() / 8.4330e-7 - 1.0).abs() < 1e-4);
        assert!((m.transverse_width() / 3.0464e-7 - 1.0).abs() < 1e-4);
        assert!((m.atom_count() / 1.9298e9 - 1.0).abs() < 1e-4);
        assert!((m.bond_momentum() / 2.6219e-22 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn validation_rejects_bad_configurations() {
        let mut p = NanobeamParams::default();
        p.delta_omega_rad_per_s = p.omega_rad_per_s;
        assert!(NanobeamModel::new(p).is_err());
        let mut p = NanobeamParams::default();
        p.density_kg_m3 = 0.0;
        assert!(NanobeamModel::new(p).is_err());
        let mut p = NanobeamParams::default();
        p.readout_phase_rad = f64::NAN;
        assert!(NanobeamModel::new(p).is_err());
    }

    #[test]
    fn axial_integral_branches_agree_at_their_seams() {
        // series vs Faddeeva form at the lower seam, and a frozen
        // independent high-precision value there
        let s = axial_integral_series(0.3);
        let w = axial_integral_wform(0.3);
        assert!((s / w - 1.0).abs() < 1e-10, "{s} vs {w}");
        assert!((s / 3.015_000_783_582_707e-2 - 1.0).abs() < 1e-12, "{s}");
        // Faddeeva form vs direct quadrature at the upper seam
        let wq = axial_integral_wform(20.0);
        let q = axial_integral_quadrature(20.0).unwrap();
        assert!((wq / q - 1.0).abs() < 1e-8, "{wq} vs {q}");
        // fast-oscillation branch against a frozen reference
        let far = axial_integral_quadrature(1000.0).unwrap();
        assert!(
            (far / 4.938_037_967_708_895e-13 - 1.0).abs() < 1e-9,
            "{far}"
        );
    }

    #[test]
    fn geometric_factor_matches_frozen_continuum_values() {
        let m = model();
        let lz = m.flexural_half_wavelength();
        for (frac, expected) in [
            (0.1, 2.248_027_70e40),
            (1.0, 2.627_309_66e39),
            (10.0, 3.373_121_84e35),
        ] {
            let u = m.geometric_factor(HBAR / (frac * lz)).unwrap();
            assert!(
                (u / expected - 1.0).abs() < 1e-7,
                "frac {frac}: {u} vs {expected}"
            );
        }
    }

    #[test]
    fn continuum_factor_matches_the_defining_quadrature() {
        let m = model();
        let p = m.params();
        for hsq in [0.3 * m.flexural_half_wavelength(), 2.0e-6] {
            let sq = HBAR / hsq;
            let closed = m.geometric_factor(sq).unwrap();
            let direct = continuum_u_quadrature(
                m.transverse_width(),
                m.flexural_half_wavelength(),
                p.density_kg_m3,
                sq,
            )
            .unwrap();
            assert!(
                (closed / direct - 1.0).abs() < 1e-6,
                "hsq {hsq}: {closed} vs {direct}"
            );
        }
    }

    #[test]
    fn atomic_factor_matches_quadrature_and_its_quadratic_limit() {
        let m = model();
        let qc = m.bond_momentum();
        for sq in [qc, 0.3 * qc, 3.0 * qc] {
            assert!(HBAR / sq < m.params().atomic_switch_m);
            let closed = m.geometric_factor(sq).unwrap();
            let direct =
                atomic_u_quadrature(m.atom_count(), m.params().atom_mass_kg, qc, sq).unwrap();
            assert!(
                (closed / direct - 1.0).abs() < 1e-8,
                "sq {sq:e}: {closed} vs {direct}"
            );
        }
        // σ_q ≪ q_c: the cutoff is irrelevant and U → N(m/m_e)²σ²/(4ħ²)
        let sq = 0.02 * qc;
        let closed = m.geometric_factor(sq).unwrap();
        let ratio = m.params().atom_mass_kg / M_E;
        let quadratic = m.atom_count() * ratio * ratio * sq * sq / (4.0 * HBAR * HBAR);
        assert!((closed / quadratic - 1.0).abs() < 1e-2, "{closed} vs {quadratic}");
    }

    #[test]
    fn quantum_limit_reproduces_ideal_fringe_correlations() {
        let m = model();
        let params = ModificationParams::quantum_limit(1e-22).unwrap();
        let ctx = NanobeamContext {
            theta_rad: 0.8,
            t_s: 123e-9,
        };
        let p = m.coincidence_probabilities(&ctx, &params).unwrap();
        let a = ctx.theta_rad
            - m.params().delta_omega_rad_per_s * ctx.t_s
            - m.params().readout_phase_rad;
        for (k, o) in CoincidenceOutcome::ALL.iter().enumerate() {
            let (s1, s2) = o.signs();
            let ideal = (1.0 + f64::from(s1) * f64::from(s2) * a.cos()) / 4.0;
            assert!((p[k] - ideal).abs() < 1e-14, "{o}: {} vs {ideal}", p[k]);
        }
    }

    #[test]
    fn probabilities_sum_to_one_exactly_and_match_sign_symmetry() {
        let m = model();
        let qc = m.bond_momentum();
        for tau in [f64::INFINITY, 1e9, 2.33e7, 1e3] {
            let params = ModificationParams::new(tau, qc, 0.0).unwrap();
            for theta in [0.0, 0.9, 2.4, 5.1] {
                let ctx = NanobeamContext {
                    theta_rad: theta,
                    t_s: 200e-9,
                };
                let p = m.coincidence_probabilities(&ctx, &params).unwrap();
                let sum: f64 = p.iter().sum();
                assert_eq!(sum, 1.0, "theta {theta}, tau {tau:e}: sum {sum}");
                assert_eq!(p[1], p[2]);
                assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
        }
    }

    #[test]
    fn likelihood_matches_the_characteristic_function_oracle() {
        // The oracle carries the exact per-mode frequencies and damping
        // envelopes; the closed form uses the mean frequency.  Probe the
        // same decoherence strengths the acceptance gate uses.
        let m = model();
        let p = NanobeamParams {
            readout_phase_rad: 0.0,
            ..NanobeamParams::default()
        };
        let m0 = NanobeamModel::new(p).unwrap();
        let setup = CharFnSetup {
            omega_rad_per_s: m.params().omega_rad_per_s,
            delta_omega_rad_per_s: m.params().delta_omega_rad_per_s,
            eff_mass_kg: m.params().eff_mass_kg,
            lx_m: m.transverse_width(),
            lz_m: m.flexural_half_wavelength(),
            density_kg_m3: m.params().density_kg_m3,
            n_atoms: m.atom_count(),
            atom_mass_kg: m.params().atom_mass_kg,
            cutoff_momentum: m.bond_momentum(),
            atomic_switch_m: m.params().atomic_switch_m,
        };
        let sq = m.bond_momentum();
        let t = 123e-9;
        let xi = m0.coupling_rate(sq).unwrap();
        for x_target in [0.1, 1.0] {
            let tau = xi * t / x_target;
            let params = ModificationParams::new(tau, sq, 0.0).unwrap();
            for theta in [0.3, 1.5, 2.8] {
                let ctx = NanobeamContext {
                    theta_rad: theta,
                    t_s: t,
                };
                let analytic = m0.coincidence_probabilities(&ctx, &params).unwrap();
                let oracle = nanobeam_char_quadrature(&setup, &params, theta, t, 40).unwrap();
                for k in 0..4 {
                    let scale = oracle[k].max(1e-12);
                    assert!(
                        ((analytic[k] - oracle[k]) / scale).abs() < 0.05,
                        "x {x_target}, theta {theta}, outcome {k}: \
                         {} vs {}",
                        analytic[k],
                        oracle[k]
                    );
                }
            }
        }
    }

    #[test]
    fn fringe_visibility_decays_with_modification_strength() {
        let m = model();
        let qc = m.bond_momentum();
        let ctx = NanobeamContext {
            theta_rad: m.params().readout_phase_rad + m.params().delta_omega_rad_per_s * 123e-9,
            t_s: 123e-9,
        }; // A = 0: maximal ++ fringe
        let mut prev = f64::INFINITY;
        for tau in [f64::INFINITY, 1e9, 1e8, 1e7, 1e6, 1e5] {
            let params = ModificationParams::new(tau, qc, 0.0).unwrap();
            let p = m.coincidence_probabilities(&ctx, &params).unwrap();
            let visibility = p[0] - p[1];
            assert!(visibility <= prev + 1e-15, "tau {tau:e}");
            prev = visibility;
        }
    }

    #[test]
    fn log_likelihood_and_expectation_follow_the_probability_vector() {
        let m = model();
        let params = ModificationParams::new(5e7, m.bond_momentum(), 0.0).unwrap();
        let ctx = NanobeamContext {
            theta_rad: 1.1,
            t_s: 150e-9,
        };
        let p = m.coincidence_probabilities(&ctx, &params).unwrap();
        for o in CoincidenceOutcome::ALL {
            let ll = m.log_likelihood(&o, &ctx, &params).unwrap();
            assert!((ll - p[o.index()].ln()).abs() < 1e-15);
        }
        let total = m.expectation(&ctx, &params, &|_| 1.0, 1e-9).unwrap();
        assert!((total - 1.0).abs() < 1e-15);
        let mean_product = m
            .expectation(
                &ctx,
                &params,
                &|o| {
                    let (s1, s2) = o.signs();
                    f64::from(s1) * f64::from(s2)
                },
                1e-9,
            )
            .unwrap();
        assert!((mean_product - (p[0] - p[1] - p[2] + p[3])).abs() < 1e-15);
    }

    #[test]
    fn impossible_outcomes_get_minus_infinity() {
        let m = model();
        let params = ModificationParams::quantum_limit(1e-22).unwrap();
        // A = 0 makes the anti-correlated outcomes exactly impossible
        let ctx = NanobeamContext {
            theta_rad: m.params().readout_phase_rad + m.params().delta_omega_rad_per_s * 123e-9,
            t_s: 123e-9,
        };
        let ll = m
            .log_likelihood(&CoincidenceOutcome::PlusMinus, &ctx, &params)
            .unwrap();
        assert_eq!(ll, f64::NEG_INFINITY);
    }

    #[test]
    fn simulation_is_reproducible_and_conserves_shots() {
        let m = model();
        let params = ModificationParams::new(2.33e7, m.bond_momentum(), 0.0).unwrap();
        let protocols = m.default_protocols();
        assert_eq!(protocols.len(), 2);
        let design: Vec<(NanobeamContext, f64)> = protocols
            .iter()
            .flat_map(|(_, d)| d.iter().copied())
            .collect();
        assert_eq!(design.len(), 32);
        let total_shots: f64 = design.iter().map(|&(_, w)| w).sum();
        assert!((total_shots - 6000.0).abs() < 1e-9);
        let a = m.simulate_coincidences(&params, &design, 11).unwrap();
        let b = m.simulate_coincidences(&params, &design, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total_weight(), 6000);
        // weight collapse: at most 4 outcome rows per context
        assert!(a.runs().len() <= 4 * design.len());
    }

    #[test]
    fn outcome_labels_round_trip() {
        for o in CoincidenceOutcome::ALL {
            assert_eq!(CoincidenceOutcome::parse(o.label()).unwrap(), o);
        }
        assert_eq!(
            CoincidenceOutcome::parse("pm").unwrap(),
            CoincidenceOutcome::PlusMinus
        );
        assert!(CoincidenceOutcome::parse("+?").is_err());
    }

    #[test]
    fn rejects_displacement_scales_and_bad_contexts() {
        let m = model();
        let with_disp = ModificationParams::new(1e7, 1e-22, 1e-11).unwrap();
        let ctx = NanobeamContext {
            theta_rad: 0.0,
            t_s: 123e-9,
        };
        assert!(m.coincidence_probabilities(&ctx, &with_disp).is_err());
        let ok = ModificationParams::new(1e7, 1e-22, 0.0).unwrap();
        let bad_t = NanobeamContext {
            theta_rad: 0.0,
            t_s: -1.0,
        };
        assert!(m.coincidence_probabilities(&bad_t, &ok).is_err());
    }
}
