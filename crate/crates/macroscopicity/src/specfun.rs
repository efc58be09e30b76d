//! Numerically stable special functions used by the closed-form likelihoods:
//! the Jacobi theta function ϑ₃, the error function, the Faddeeva function,
//! log-binomial coefficients, and the auxiliary function `h_aux` appearing in
//! the printed closed form of the nanobeam mode-overlap factor.

use num_complex::Complex64;
use thiserror::Error;

/// Domain errors for the special-function layer.
#[derive(Debug, Error, PartialEq)]
pub enum SpecFunError {
    /// ϑ₃ nome outside `[0, 1)`.
    #[error("theta3 nome must satisfy 0 <= q < 1, got {0}")]
    NomeOutOfRange(f64),
    /// `h_aux` scale parameter not strictly positive.
    #[error("h_aux requires a > 0, got {0}")]
    NonPositiveScale(f64),
    /// Binomial coefficient index out of range.
    #[error("binomial index out of range: C({n}, {k})")]
    BinomialIndex { n: u64, k: u64 },
}

/// Error function for real argument, exact odd symmetry.
///
/// Absolute error below 1e-14 over the real line.
#[must_use]
pub fn erf_real(x: f64) -> f64 {
    if x < 0.0 {
        -errorfunctions::RealErrorFunctions::erf(-x)
    } else {
        errorfunctions::RealErrorFunctions::erf(x)
    }
}

/// Faddeeva function w(z) = e^{−z²} erfc(−iz) for complex argument.
#[must_use]
pub fn faddeeva_w(z: Complex64) -> Complex64 {
    use errorfunctions::ComplexErrorFunctions;
    z.w()
}

/// Jacobi theta function ϑ₃(u, q) = Σ_{n=−∞}^{∞} q^{n²} e^{2inu} for real u.
///
/// Two exact representations are dispatched on the nome:
/// * `q < e^{−π}`: the defining series `1 + 2 Σ_{n≥1} q^{n²} cos(2nu)`,
///   truncated once `q^{n²} < 1e−16` (at least 4 terms are always summed);
/// * `q ≥ e^{−π}`: the modular (Poisson-resummed) form
///   `ϑ₃(u, q) = √(π/λ) Σ_k exp(−(u − kπ)²/λ)` with `λ = −ln q`, which needs
///   only a handful of terms exactly where the series converges slowly.
///
/// Both branches satisfy the π-periodicity `ϑ₃(u+π, q) = ϑ₃(u, q)` and are
/// strictly increasing in q at u = 0.
///
/// # Errors
///
/// Returns [`SpecFunError::NomeOutOfRange`] unless `0 ≤ q < 1`.
pub fn theta3(u: f64, q: f64) -> Result<f64, SpecFunError> {
    if !(0.0..1.0).contains(&q) {
        return Err(SpecFunError::NomeOutOfRange(q));
    }
    if q == 0.0 {
        return Ok(1.0);
    }
    let series_cut = (-std::f64::consts::PI).exp();
    if q < series_cut {
        let mut acc = 1.0;
        let mut n = 1i32;
        loop {
            let qn = q.powi(n * n);
            if qn < 1e-16 && n > 4 {
                break;
            }
            acc += 2.0 * qn * (2.0 * f64::from(n) * u).cos();
            n += 1;
            if n > 40_000 {
                break; // unreachable for q < e^{-pi}; defensive cap
            }
        }
        Ok(acc)
    } else {
        let lam = -q.ln();
        // reduce to the fundamental period; the Gaussian comb then needs
        // |k| <= ceil(sqrt(37 lam))/pi + 1 terms for 1e-16 tails
        let ur = u.rem_euclid(std::f64::consts::PI);
        let reach = (37.0 * lam).sqrt() / std::f64::consts::PI;
        let kmax = reach.ceil() as i64 + 1;
        let mut acc = 0.0;
        for k in -kmax..=kmax {
            let d = ur - std::f64::consts::PI * k as f64;
            acc += (-d * d / lam).exp();
        }
        Ok((std::f64::consts::PI / lam).sqrt() * acc)
    }
}

/// Natural log of the gamma function for x > 0 (Lanczos approximation,
/// g = 7, 9 coefficients; absolute error ≈ 1e−13 over the domain used here).
#[must_use]
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x > 0.0, "ln_gamma requires positive argument");
    let xm1 = x - 1.0;
    let mut acc = G[0];
    for (i, &c) in G.iter().enumerate().skip(1) {
        acc += c / (xm1 + i as f64);
    }
    let t = xm1 + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (xm1 + 0.5) * t.ln() - t + acc.ln()
}

/// log C(n, k) via log-gamma; exact to 1e−10 relative even at n = 1200.
///
/// # Errors
///
/// Returns [`SpecFunError::BinomialIndex`] if `k > n`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64, SpecFunError> {
    if k > n {
        return Err(SpecFunError::BinomialIndex { n, k });
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    Ok(ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0))
}

/// Auxiliary function of the nanobeam closed-form overlap factor:
///
/// `h(a, b) = √(π/2) (3ia² + πb² − iπ²) · exp(((π/a − ib)²)/2) · erf((iπ/a + b)/√2)`
///
/// evaluated in the fused form `C · [e^{−z²} − e^{−2z²} w(iz)]` with
/// `z = (b + iπ/a)/√2`, so the exponential and the complex error function are
/// never composed naively. Note the magnitude of `h` itself grows like
/// `exp(π²/a² + …)` as `a → 0` (the printed bracket is an asymptotic form),
/// so values overflow to infinity for `a` below roughly 0.12 at `b = 0`; the
/// production overlap-factor path does not route through this function.
///
/// # Errors
///
/// Returns [`SpecFunError::NonPositiveScale`] if `a ≤ 0`.
pub fn h_aux(a: f64, b: f64) -> Result<Complex64, SpecFunError> {
    if a <= 0.0 {
        return Err(SpecFunError::NonPositiveScale(a));
    }
    let pi = std::f64::consts::PI;
    let sqrt2 = std::f64::consts::SQRT_2;
    let z = Complex64::new(b, pi / a) / sqrt2;
    let z2 = z * z;
    let prefac = (pi / 2.0).sqrt() * Complex64::new(pi * b * b, 3.0 * a * a - pi * pi);
    let fused = (-z2).exp() - (-2.0 * z2).exp() * faddeeva_w(Complex64::new(0.0, 1.0) * z);
    Ok(prefac * fused)
}
