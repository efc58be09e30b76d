//! Monte Carlo integration of the shear-diffusion Langevin dynamics.
//!
//! The collective-spin shear noise obeys the pair of stochastic equations
//! d j_y = 2ζ j_z dt and d j_z = √(Γ_S/2)·J·dW (the diffusion constant
//! matching a Fokker–Planck term (Γ_S J²/4)·∂²/∂j_z²).  This module
//! estimates Var(j_y) at a fixed time by Euler–Maruyama sampling, as an
//! independent check of the closed-form variance growth law used by the
//! interferometer likelihood.

use crate::domain::{Error, Result};
use crate::rng::SeededRng;

/// Sample-variance estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct ShearMcResult {
    /// Sample variance of j_y at the final time.
    pub variance: f64,
    /// Standard error of a Gaussian variance estimate, Var·√(2/n).
    pub std_error: f64,
    /// Number of Euler–Maruyama steps taken.
    pub steps: usize,
}

/// Number of independently seeded sample streams; stream `c` uses
/// `base_seed + c`, so the result is reproducible regardless of how the
/// streams are scheduled.
const STREAMS: u64 = 8;

/// Estimates Var(j_y)(t) for Gaussian initial conditions
/// j_y(0) ~ N(0, sigma_y0²), j_z(0) ~ N(0, sigma_z0²).
///
/// The step size is 10⁻³ of the fastest dynamical time, min(1/ζJ, 1/Γ_S J²),
/// capped at the horizon itself.
///
/// # Errors
///
/// [`Error::Config`] for fewer than 10⁴ samples, non-positive horizon, or
/// negative rates.
pub fn shear_diffusion_mc(
    zeta: f64,
    gamma_s: f64,
    j: f64,
    sigma_y0: f64,
    sigma_z0: f64,
    t: f64,
    n_samples: usize,
    base_seed: u64,
) -> Result<ShearMcResult> {
    if n_samples < 10_000 {
        return Err(Error::Config(format!(
            "shear Monte Carlo needs at least 1e4 samples, got {n_samples}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Config(format!("horizon t = {t} must be positive")));
    }
    for (name, v) in [
        ("zeta", zeta),
        ("gamma_s", gamma_s),
        ("j", j),
        ("sigma_y0", sigma_y0),
        ("sigma_z0", sigma_z0),
    ] {
        if v < 0.0 || !v.is_finite() {
            return Err(Error::Config(format!("{name} = {v} must be finite and ≥ 0")));
        }
    }
    let mut dt = t;
    if zeta * j > 0.0 {
        dt = dt.min(1e-3 / (zeta * j));
    }
    if gamma_s * j * j > 0.0 {
        dt = dt.min(1e-3 / (gamma_s * j * j));
    }
    let steps = (t / dt).ceil() as usize;
    let dt = t / steps as f64;
    let kick = (gamma_s / 2.0).sqrt() * j * dt.sqrt();

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let per_stream = n_samples / STREAMS as usize;
    let remainder = n_samples - per_stream * STREAMS as usize;
    for c in 0..STREAMS {
        let mut rng = SeededRng::new(base_seed + c);
        let n_here = per_stream + usize::from((c as usize) < remainder);
        for _ in 0..n_here {
            let mut jy = sigma_y0 * rng.normal();
            let mut jz = sigma_z0 * rng.normal();
            for _ in 0..steps {
                jy += 2.0 * zeta * jz * dt;
                jz += kick * rng.normal();
            }
            sum += jy;
            sum_sq += jy * jy;
        }
    }
    let n = n_samples as f64;
    let variance = (sum_sq - sum * sum / n) / n;
    Ok(ShearMcResult {
        variance,
        std_error: variance * (2.0 / n).sqrt(),
        steps,
    })
}

/// Closed-form variance the Monte Carlo validates:
/// σ_y² + 4ζ²t²(σ_z² + J²Γ_S t/6).
#[must_use]
pub fn shear_variance_formula(
    zeta: f64,
    gamma_s: f64,
    j: f64,
    sigma_y0: f64,
    sigma_z0: f64,
    t: f64,
) -> f64 {
    sigma_y0 * sigma_y0
        + 4.0 * zeta * zeta * t * t * (sigma_z0 * sigma_z0 + j * j * gamma_s * t / 6.0)
}
