//! Direct quadrature of the defining integral for the nanobeam coupling
//! strength U(σ_q) = (1/2ħ²) ∫ d³q f_σ(q) |w̃(q)·q|², used as the reference
//! the closed-form geometric factor is validated against.
//!
//! The flexural mode function is separable, so the 3-D integral factors into
//! 1-D integrals along the beam axes.  In the discrete-atom regime (coherence
//! length below the lattice scale) the defining integral is instead the
//! radial Gaussian moment cut off at the bond momentum.  Both routes are
//! integrated numerically; neither shares code with the closed forms.

use crate::domain::{Error, Result};
use crate::quad;
use crate::units;

/// Integrates `f` over panels bounded by `edges` (ascending), refining each
/// panel adaptively to a tolerance scaled from a first whole-domain pass.
fn integrate_panels<F: Fn(f64) -> f64>(f: &F, edges: &[f64], rel_tol: f64) -> Result<f64> {
    let wrap = |e: quad::QuadError| Error::Numerical(format!("geometric-factor quadrature: {e}"));
    let mut rough = 0.0;
    for w in edges.windows(2) {
        rough += quad::integrate(f, w[0], w[1], f64::MAX).map_err(wrap)?.abs();
    }
    let tol_each = (rel_tol * rough).max(1e-300) / (edges.len() - 1) as f64;
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += quad::integrate(f, w[0], w[1], tol_each).map_err(wrap)?;
    }
    Ok(total)
}

/// Panel edges on [−lim, lim] spaced no wider than half an oscillation
/// period of frequency `osc`, with optional extra break points.
fn oscillation_edges(lim: f64, osc: f64, extra: &[f64]) -> Vec<f64> {
    let width = (std::f64::consts::PI / osc.max(1e-6)).min(1.0);
    let n = ((2.0 * lim) / width).ceil() as usize;
    let mut edges: Vec<f64> = (0..=n).map(|i| -lim + 2.0 * lim * i as f64 / n as f64).collect();
    for &p in extra {
        if p > -lim && p < lim {
            edges.push(p);
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
}

/// sin²(a·s/2)/s², finite at s = 0.
fn sin_sq_over_s_sq(a: f64, s: f64) -> f64 {
    let h = 0.5 * a * s;
    if h.abs() < 1e-8 {
        let a2 = 0.25 * a * a;
        a2 * (1.0 - h * h / 3.0)
    } else {
        let sn = h.sin();
        sn * sn / (s * s)
    }
}

/// U(σ_q) for the continuum flexural mode, by direct quadrature of the
/// defining momentum integral (valid where the mode function is smooth on
/// the coherence scale).
///
/// `lx_m` is the transverse mode width, `lz_m` the half-wavelength of the
/// flexural standing wave, `density_kg_m3` the material mass density.
///
/// # Errors
///
/// [`Error::Numerical`] if any 1-D panel fails to converge.
pub fn continuum_u_quadrature(
    lx_m: f64,
    lz_m: f64,
    density_kg_m3: f64,
    sigma_q: f64,
) -> Result<f64> {
    let alpha = lx_m * sigma_q / units::HBAR;
    let beta = lz_m * sigma_q / units::HBAR;
    let inv_sqrt_2pi = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let lim = 45.0;

    // transverse: Ix = (4ħ²/σ²) ∫ φ(s) sin²(αs/2)/s² ds
    let fx = |s: f64| (-0.5 * s * s).exp() * inv_sqrt_2pi * sin_sq_over_s_sq(alpha, s);
    let ix = integrate_panels(&fx, &oscillation_edges(lim, alpha, &[]), 1e-11)?
        * 4.0
        * units::HBAR
        * units::HBAR
        / (sigma_q * sigma_q);

    // axial: Iz = 4σ²β²Lz² ∫ φ(s) s⁴ cos²(βs/2)/(π²−β²s²)² ds
    let pi = std::f64::consts::PI;
    let c = pi / beta;
    let fz = |s: f64| {
        let mut s = s;
        let mut den = pi * pi - beta * beta * s * s;
        if den.abs() < 1e-12 {
            // removable singularity: cos²(βs/2) vanishes to the same order
            s += 1e-7;
            den = pi * pi - beta * beta * s * s;
        }
        let cosf = (0.5 * beta * s).cos();
        (-0.5 * s * s).exp() * inv_sqrt_2pi * s.powi(4) * cosf * cosf / (den * den)
    };
    let iz = integrate_panels(&fz, &oscillation_edges(lim, beta, &[-c, c]), 1e-11)?
        * 4.0
        * sigma_q
        * sigma_q
        * beta
        * beta
        * lz_m
        * lz_m;

    let scale = density_kg_m3 / units::M_E;
    Ok(scale * scale * ix * ix * iz / (2.0 * units::HBAR * units::HBAR))
}

/// U(σ_q) in the discrete-atom regime, by quadrature of the radial Gaussian
/// moment cut off at the bond momentum `cutoff_momentum`:
/// U = N m²/(12 ħ² m_e²) · √(2/π) σ² ∫₀^{q_c/σ} u⁴ e^{−u²/2} du.
///
/// # Errors
///
/// [`Error::Numerical`] if the radial quadrature fails.
pub fn atomic_u_quadrature(
    n_atoms: f64,
    atom_mass_kg: f64,
    cutoff_momentum: f64,
    sigma_q: f64,
) -> Result<f64> {
    let upper = (cutoff_momentum / sigma_q).min(50.0);
    let f = |u: f64| u.powi(4) * (-0.5 * u * u).exp();
    let radial = quad::integrate(&f, 0.0, upper, 1e-13)
        .map_err(|e| Error::Numerical(format!("atomic-regime quadrature: {e}")))?;
    let bracket = (2.0 / std::f64::consts::PI).sqrt() * sigma_q * sigma_q * radial;
    let ratio = atom_mass_kg / units::M_E;
    Ok(n_atoms * ratio * ratio / (12.0 * units::HBAR * units::HBAR) * bracket)
}
