//! Quadrature building blocks: adaptive Gauss–Kronrod (G7/K15) integration,
//! Gauss–Legendre and Gauss–Hermite node generation, and trapezoidal helpers
//! for densities tabulated on a logarithmic grid.

use thiserror::Error;

/// Failures of the adaptive integrator.
#[derive(Debug, Error)]
pub enum QuadError {
    /// Recursion exhausted before the tolerance was met.
    #[error("adaptive quadrature failed to reach tolerance {tol:e} on [{a}, {b}] (best error {err:e})")]
    NoConvergence { a: f64, b: f64, tol: f64, err: f64 },
    /// The integrand returned a non-finite value.
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
}

// 15-point Kronrod abscissae on [-1, 1] (positive half) and weights,
// with the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One G7/K15 panel: returns (Kronrod estimate, |K15 − G7| error estimate).
fn gk15_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let eval = |t: f64| -> Result<f64, QuadError> {
            let v = f(t);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(QuadError::NonFinite(t))
            }
        };
        if x == 0.0 {
            let v = eval(c)?;
            kronrod += wk * v;
            gauss += WG[3] * v;
        } else {
            let v1 = eval(c - h * x)?;
            let v2 = eval(c + h * x)?;
            kronrod += wk * (v1 + v2);
            // odd Kronrod indices are the embedded Gauss nodes
            if i % 2 == 1 {
                gauss += WG[i / 2] * (v1 + v2);
            }
        }
    }
    kronrod *= h;
    gauss *= h;
    Ok((kronrod, (kronrod - gauss).abs()))
}

/// Adaptive G7/K15 quadrature of `f` over `[a, b]` to absolute tolerance
/// `abs_tol`, recursing on the subinterval with the larger error estimate.
///
/// # Errors
///
/// [`QuadError::NoConvergence`] if 60 levels of bisection do not reach the
/// tolerance; [`QuadError::NonFinite`] if the integrand misbehaves.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<f64, QuadError> {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        depth: u32,
    ) -> Result<(f64, f64), QuadError> {
        let (val, err) = gk15_panel(f, a, b)?;
        if err <= tol || depth >= 60 {
            return Ok((val, err));
        }
        let c = 0.5 * (a + b);
        let (v1, e1) = recurse(f, a, c, 0.5 * tol, depth + 1)?;
        let (v2, e2) = recurse(f, c, b, 0.5 * tol, depth + 1)?;
        Ok((v1 + v2, e1 + e2))
    }
    if a == b {
        return Ok(0.0);
    }
    let (val, err) = recurse(f, a, b, abs_tol, 0)?;
    if err > abs_tol.max(1e-14 * val.abs()) * 8.0 {
        return Err(QuadError::NoConvergence {
            a,
            b,
            tol: abs_tol,
            err,
        });
    }
    Ok(val)
}

/// Adaptive integration over `[a, b]` pre-split at the supplied interior
/// break points (integrable singularities, mixture-component edges, ridge
/// locations). Points outside `(a, b)` are ignored.
///
/// # Errors
///
/// Propagates [`QuadError`] from any sub-panel.
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    splits: &[f64],
    abs_tol: f64,
) -> Result<f64, QuadError> {
    let mut edges: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    edges.push(a);
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let tol_each = abs_tol / (edges.len() - 1) as f64;
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += integrate(f, w[0], w[1], tol_each)?;
    }
    Ok(total)
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on the
/// Legendre recurrence (machine-precision for the orders used here).
#[must_use]
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P'_n(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Hermite nodes and weights for ∫ e^{−x²} f(x) dx (physicists'
/// convention), computed by the Golub–Welsch eigenvalue method.
#[must_use]
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    use nalgebra::{DMatrix, SymmetricEigen};
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let beta = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = beta;
        jac[(k, k - 1)] = beta;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pair: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pair.sort_by(|a, b| a.0.total_cmp(&b.0));
    pair.into_iter().unzip()
}

/// Trapezoidal integral of samples `y` against abscissae `x` (both length n).
#[must_use]
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (ys[0] + ys[1]) * (xs[1] - xs[0]))
        .sum()
}

/// Running trapezoidal cumulative integral; `out[0] = 0`,
/// `out[n−1]` equals [`trapezoid`].
#[must_use]
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(x.len());
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
        out.push(acc);
    }
    out
}
