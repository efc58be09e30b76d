//! The inference engine: Jeffreys' prior from Fisher information, Bayesian
//! updating on a log-spaced τ_e grid, quantile extraction, odds ratios,
//! heating conditioning, and maximization of the excluded time scale over
//! the momentum scale σ_q.
//!
//! Densities are carried with respect to dτ_e (not d log τ); all grid
//! integrals use the trapezoidal rule in τ_e, which keeps the cumulative
//! distribution monotone and the quantile well defined.
//!
//! Grid-point evaluations and σ_q scan points are independent and could be
//! parallelized; the shipped implementation is sequential and depends only
//! on models being shareable across threads (`Sync`).

use std::cell::RefCell;

use crate::domain::{
    dataset_log_likelihood, Dataset, Error, ExperimentModel, ModificationParams, Result,
    SigmaScales,
};
use crate::quad::{cumulative_trapezoid, trapezoid};

/// Relative step in log τ_e for the central finite difference inside the
/// Fisher information.  Validated against Richardson extrapolation in
/// tests.
const FISHER_LOG_STEP: f64 = 1e-4;

/// Absolute tolerance handed to continuous models' expectation quadrature
/// when accumulating the Fisher information (the integrand is the squared
/// per-run score in log τ, an order-unity quantity).
const FISHER_ABS_TOL: f64 = 1e-8;

/// Default number of σ_q scan points in [`maximize_over_sigma`].
pub const DEFAULT_SIGMA_SCAN_POINTS: usize = 60;

/// Default exclusion quantile, matching threshold odds of 1:19.
pub const DEFAULT_QUANTILE_P: f64 = 0.05;

/// A strictly increasing grid of τ_e values, uniform in log10 τ.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTauGrid {
    log10_tau: Vec<f64>,
    tau: Vec<f64>,
}

impl LogTauGrid {
    /// A uniform grid of `n` points spanning [10^log10_lo, 10^log10_hi]
    /// seconds; requires n ≥ 100 and log10_lo < log10_hi.
    pub fn new(log10_lo: f64, log10_hi: f64, n: usize) -> Result<Self> {
        if n < 100 {
            return Err(Error::Config(format!(
                "log-tau grid needs at least 100 points, got {n}"
            )));
        }
        if !(log10_lo < log10_hi) || !log10_lo.is_finite() || !log10_hi.is_finite() {
            return Err(Error::Config(format!(
                "log-tau grid range must be finite with lo < hi, got [{log10_lo}, {log10_hi}]"
            )));
        }
        let step = (log10_hi - log10_lo) / (n - 1) as f64;
        let log10_tau: Vec<f64> = (0..n).map(|i| log10_lo + step * i as f64).collect();
        let tau = log10_tau.iter().map(|&x| 10f64.powf(x)).collect();
        Ok(Self { log10_tau, tau })
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// τ_e values in seconds.
    pub fn tau_values(&self) -> &[f64] {
        &self.tau
    }

    /// log10 of the τ_e values.
    pub fn log10_values(&self) -> &[f64] {
        &self.log10_tau
    }
}

impl Default for LogTauGrid {
    /// [10⁻¹², 10¹⁴] s with 2400 points: two decades of margin either side
    /// of the regimes the shipped experiments reach.
    fn default() -> Self {
        Self::new(-12.0, 14.0, 2400).expect("default grid parameters are valid")
    }
}

/// A probability density over τ_e sampled on a [`LogTauGrid`].  Values are
/// densities with respect to dτ_e; when `normalized` the trapezoidal
/// integral over τ_e is 1 within 1e-6.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOnGrid {
    grid: LogTauGrid,
    values: Vec<f64>,
    normalized: bool,
}

impl DensityOnGrid {
    /// Wraps raw non-negative density values (not yet normalized).
    pub fn from_values(grid: LogTauGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "density has {} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Numerical(
                "density values must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            grid,
            values,
            normalized: false,
        })
    }

    /// Rescales so the trapezoidal integral over τ_e equals one.
    pub fn normalize(mut self) -> Result<Self> {
        let z = trapezoid(&self.grid.tau, &self.values);
        if !z.is_finite() || z <= 0.0 {
            return Err(Error::Numerical(format!(
                "density integral {z} cannot be normalized"
            )));
        }
        for v in &mut self.values {
            *v /= z;
        }
        self.normalized = true;
        Ok(self)
    }

    pub fn grid(&self) -> &LogTauGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Trapezoidal integral over τ_e.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid.tau, &self.values)
    }

    fn require_normalized(&self, op: &str) -> Result<()> {
        if !self.normalized {
            return Err(Error::Config(format!(
                "{op} requires a normalized density"
            )));
        }
        Ok(())
    }

    /// Normalized cumulative trapezoidal integral at each grid point.
    fn cdf(&self) -> Vec<f64> {
        let mut cdf = cumulative_trapezoid(&self.grid.tau, &self.values);
        let total = *cdf.last().expect("grid is non-empty");
        if total > 0.0 {
            for c in &mut cdf {
                *c /= total;
            }
        }
        cdf
    }

    /// The smallest τ_e whose cumulative probability reaches `p`, linearly
    /// interpolated within the bracketing grid bin.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.require_normalized("quantile")?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Config(format!(
                "quantile level must lie in (0, 1), got {p}"
            )));
        }
        let cdf = self.cdf();
        let taus = &self.grid.tau;
        let i = match cdf.iter().position(|&c| c >= p) {
            Some(i) => i,
            None => {
                return Err(Error::Numerical(
                    "cumulative distribution never reaches the requested level".into(),
                ))
            }
        };
        if i == 0 {
            return Ok(taus[0]);
        }
        let (c0, c1) = (cdf[i - 1], cdf[i]);
        let (t0, t1) = (taus[i - 1], taus[i]);
        Ok(t0 + (p - c0) * (t1 - t0) / (c1 - c0))
    }

    /// Odds CDF(τ*) / (1 − CDF(τ*)) that the coherence time lies below
    /// τ*; +∞ when the upper tail mass vanishes to numerical precision.
    pub fn odds_ratio(&self, tau_star: f64) -> Result<f64> {
        self.require_normalized("odds_ratio")?;
        let taus = &self.grid.tau;
        let (lo, hi) = (taus[0], taus[taus.len() - 1]);
        if !(tau_star >= lo && tau_star <= hi) {
            return Err(Error::Config(format!(
                "tau_star = {tau_star:e} s lies outside the grid range [{lo:e}, {hi:e}]"
            )));
        }
        let cdf = self.cdf();
        let i = taus.partition_point(|&t| t < tau_star);
        let c = if i == 0 {
            0.0
        } else if i >= taus.len() {
            1.0
        } else {
            // Same linear interpolation the quantile uses, so the two
            // operations are exact inverses of each other.
            let (t0, t1) = (taus[i - 1], taus[i]);
            let (c0, c1) = (cdf[i - 1], cdf[i]);
            c0 + (c1 - c0) * (tau_star - t0) / (t1 - t0)
        };
        let upper = 1.0 - c;
        if upper <= f64::EPSILON {
            return Ok(f64::INFINITY);
        }
        Ok(c / upper)
    }
}

/// Log-log slopes of a density over the first and last decade of its grid,
/// from least-squares fits.  Returns (small_tau_slope, large_tau_slope).
/// Grid points where the density has effectively vanished (more than 250
/// orders of magnitude below the peak) carry no slope information and are
/// excluded; a tail that has vanished entirely is super-integrable and is
/// reported as ±∞ accordingly.
pub fn tail_slopes(density: &DensityOnGrid) -> (f64, f64) {
    let logt = density.grid().log10_values();
    let n = logt.len();
    let low_hi = logt[0] + 1.0;
    let high_lo = logt[n - 1] - 1.0;
    let small = log_log_slope(density, |x| x <= low_hi).unwrap_or(f64::INFINITY);
    let large = log_log_slope(density, |x| x >= high_lo).unwrap_or(f64::NEG_INFINITY);
    (small, large)
}

fn log_log_slope(density: &DensityOnGrid, select: impl Fn(f64) -> bool) -> Option<f64> {
    let logt = density.grid().log10_values();
    let vals = density.values();
    let peak = vals.iter().cloned().fold(0.0, f64::max);
    let threshold = peak * 1e-250;
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, v) in logt.iter().zip(vals) {
        if !select(*x) || !(*v > threshold) {
            continue;
        }
        let y = v.log10();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        m += 1.0;
    }
    if m < 5.0 {
        return None;
    }
    Some((m * sxy - sx * sy) / (m * sxx - sx * sx))
}

/// Fisher information of the τ-dependence in log-τ units, summed over a
/// weighted design of independent run contexts:
/// Σ_ctx w · E_d[(d log P(d|τ,σ,ctx) / d ln τ)²], with the score from a
/// central finite difference of relative step `h`.
pub(crate) fn fisher_information_log<M: ExperimentModel>(
    model: &M,
    design: &[(M::Context, f64)],
    sigma: &SigmaScales,
    tau: f64,
    h: f64,
) -> Result<f64> {
    let params0 = sigma.at_tau(tau)?;
    let params_p = sigma.at_tau(tau * h.exp())?;
    let params_m = sigma.at_tau(tau * (-h).exp())?;
    let mut total = 0.0;
    for (context, weight) in design {
        let captured: RefCell<Option<Error>> = RefCell::new(None);
        let score_sq = |outcome: &M::Outcome| -> f64 {
            let up = model.log_likelihood(outcome, context, &params_p);
            let dn = model.log_likelihood(outcome, context, &params_m);
            match (up, dn) {
                (Ok(a), Ok(b)) => {
                    // A one-sided −∞ means the finite-difference stencil
                    // straddles a support edge in τ_e (e.g. a conditioning
                    // event whose probability underflows on one side).  The
                    // score is undefined exactly there and the edge carries
                    // no usable τ information, so that outcome contributes
                    // nothing rather than poisoning the whole integral.
                    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
                        0.0
                    } else {
                        let s = (a - b) / (2.0 * h);
                        s * s
                    }
                }
                (Err(e), _) | (_, Err(e)) => {
                    *captured.borrow_mut() = Some(e);
                    f64::NAN
                }
            }
        };
        let expectation = model.expectation(context, &params0, &score_sq, FISHER_ABS_TOL);
        if let Some(e) = captured.into_inner() {
            return Err(e);
        }
        let value = expectation?;
        if !value.is_finite() {
            return Err(Error::Numerical(format!(
                "Fisher information is {value} at tau_e = {tau:e} s"
            )));
        }
        total += weight * value.max(0.0);
    }
    Ok(total)
}

/// Jeffreys' prior over τ_e: p(τ) = sqrt(E_d[(∂_τ log P)²]) evaluated on
/// the grid and normalized by the trapezoidal rule.  The expectation sums
/// exactly over discrete outcomes and integrates continuous ones through
/// the model's own quadrature.  `design` lists the single-run contexts
/// (with repetition weights) whose combined Fisher information seeds the
/// prior.
///
/// Models may declare a Fisher evaluation stride (see
/// [`ExperimentModel::fisher_grid_stride`]); in-between points are filled
/// by interpolating log p linearly in log τ, which is exact for the
/// stride-1 default.
pub fn jeffreys_prior<M: ExperimentModel>(
    model: &M,
    design: &[(M::Context, f64)],
    sigma: &SigmaScales,
    grid: &LogTauGrid,
) -> Result<DensityOnGrid> {
    if design.is_empty() {
        return Err(Error::Config(
            "Jeffreys' prior needs at least one design context".into(),
        ));
    }
    let n = grid.len();
    let stride = model.fisher_grid_stride().max(1);
    let mut eval_indices: Vec<usize> = (0..n).step_by(stride).collect();
    if *eval_indices.last().expect("grid is non-empty") != n - 1 {
        eval_indices.push(n - 1);
    }

    // log p at the evaluated indices; p(τ) = sqrt(F_log)/τ where F_log is
    // the Fisher information in log-τ units.  Zero Fisher information is a
    // genuine zero of the prior (log p = −∞), not a value to floor.
    let mut log_p_eval = Vec::with_capacity(eval_indices.len());
    for &i in &eval_indices {
        let tau = grid.tau_values()[i];
        let fisher = fisher_information_log(model, design, sigma, tau, FISHER_LOG_STEP)?;
        if fisher > 0.0 {
            log_p_eval.push(0.5 * fisher.ln() - tau.ln());
        } else {
            log_p_eval.push(f64::NEG_INFINITY);
        }
    }

    // Fill the full grid: linear interpolation of log p in the grid index,
    // which is linear in log tau because the spacing is uniform.  Segments
    // with a vanished endpoint vanish in between as well.
    let mut log_p = vec![0.0; n];
    for (k, w) in eval_indices.windows(2).enumerate() {
        let (i0, i1) = (w[0], w[1]);
        let (y0, y1) = (log_p_eval[k], log_p_eval[k + 1]);
        for i in i0..=i1 {
            log_p[i] = if i == i0 {
                y0
            } else if i == i1 {
                y1
            } else if y0.is_finite() && y1.is_finite() {
                y0 + (y1 - y0) * (i - i0) as f64 / (i1 - i0) as f64
            } else {
                f64::NEG_INFINITY
            };
        }
    }

    let shift = log_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::Numerical(
            "Fisher information vanished on the entire grid".into(),
        ));
    }
    let values: Vec<f64> = log_p.iter().map(|&lp| (lp - shift).exp()).collect();

    let raw = DensityOnGrid::from_values(grid.clone(), values)?;
    let (small_slope, large_slope) = tail_slopes(&raw);
    if large_slope >= -1.0 || small_slope <= -1.0 {
        return Err(Error::NonNormalizablePrior {
            small_tau_slope: small_slope,
            large_tau_slope: large_slope,
        });
    }
    raw.normalize()
}

/// Posterior ∝ prior × exp(dataset log-likelihood), renormalized.  The
/// likelihood is shifted by its maximum before exponentiation, so the
/// discarded evidence constant never overflows.  An empty dataset returns
/// the prior unchanged.
pub fn posterior_update<M: ExperimentModel>(
    prior: &DensityOnGrid,
    model: &M,
    data: &Dataset<M::Outcome, M::Context>,
    sigma: &SigmaScales,
) -> Result<DensityOnGrid> {
    prior.require_normalized("posterior_update")?;
    if data.is_empty() {
        return Ok(prior.clone());
    }
    let taus = prior.grid().tau_values();
    let mut log_like = Vec::with_capacity(taus.len());
    for &tau in taus {
        let params = sigma.at_tau(tau)?;
        log_like.push(dataset_log_likelihood(model, data, &params)?);
    }
    let shift = log_like.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::Numerical(
            "dataset has zero likelihood at every grid point".into(),
        ));
    }
    let values: Vec<f64> = prior
        .values()
        .iter()
        .zip(&log_like)
        .map(|(&p, &ll)| {
            let w = (ll - shift).exp();
            if w == 0.0 {
                0.0
            } else {
                p * w
            }
        })
        .collect();
    let posterior = DensityOnGrid::from_values(prior.grid().clone(), values)?.normalize()?;

    let boundary = boundary_mass_fraction(&posterior);
    if boundary > 0.20 {
        return Err(Error::BoundaryMass {
            mass_fraction: boundary,
        });
    }
    Ok(posterior)
}

/// Fraction of total mass in the outermost two grid bins on each side.
fn boundary_mass_fraction(density: &DensityOnGrid) -> f64 {
    let cdf = density.cdf();
    let n = cdf.len();
    cdf[2] + (1.0 - cdf[n - 3])
}

/// Conditions a model's joint likelihood on the heating-survival event:
/// log P(d | τ,σ,D_heat) = log P(d, D_heat|·) − log P(D_heat|·).
///
/// A survival probability below 1e-300 means the modification regime is
/// incompatible with the realized survival; the conditioned log-likelihood
/// is −∞, which downstream updating treats as legitimate (zero posterior
/// mass), not as a failure.  Only an invalid conditioned ratio (NaN or +∞)
/// is an error.
pub fn condition_on_heating<M: ExperimentModel>(
    model: &M,
    outcome: &M::Outcome,
    context: &M::Context,
    params: &ModificationParams,
) -> Result<f64> {
    if !model.supports_heating_conditioning() {
        return Err(Error::Config(format!(
            "{} does not support heating conditioning",
            model.name()
        )));
    }
    let log_marginal = model.log_heating_marginal(context, params)?;
    if log_marginal > 1e-9 {
        return Err(Error::Numerical(format!(
            "heating-survival marginal exceeds one (log = {log_marginal:e})"
        )));
    }
    const LOG_1E300: f64 = -690.775_527_898_213_7; // ln(1e-300)
    if log_marginal < LOG_1E300 {
        return Ok(f64::NEG_INFINITY);
    }
    let log_joint = model.log_joint_with_heating(outcome, context, params)?;
    let conditioned = log_joint - log_marginal;
    if conditioned.is_nan() || conditioned == f64::INFINITY {
        return Err(Error::Numerical(format!(
            "conditioned likelihood ratio is invalid ({conditioned}) at \
             tau_e = {:e} s",
            params.tau_e()
        )));
    }
    Ok(conditioned)
}

/// The macroscopicity of a dataset: the σ_q scan, the refined maximizer,
/// and μ = log10(τ_m(σ*) / 1 s).
#[derive(Debug, Clone)]
pub struct MacroscopicityReport {
    /// σ_q values of the coarse scan, in kg·m/s.
    pub sigma_q_samples: Vec<f64>,
    /// Excluded time scale τ_m at each scan point, in seconds.
    pub tau_m_values: Vec<f64>,
    /// The refined maximizer σ_q*.
    pub sigma_q_star: f64,
    /// τ_m(σ_q*), in seconds.
    pub tau_m_star: f64,
    /// μ = log10(τ_m(σ_q*) / 1 s).
    pub mu_m: f64,
    /// True when the maximum sits at an endpoint of the scanned σ_q range
    /// (legitimate when the experiment's sensitivity saturates there).
    pub boundary_maximum: bool,
    /// Which measurement protocol seeded the prior, when a selection was
    /// made.
    pub prior_protocol: Option<String>,
}

/// Options controlling the σ_q maximization.
#[derive(Debug, Clone)]
pub struct MacroscopicityOptions {
    /// Number of log-spaced scan points across the σ_q range.
    pub scan_points: usize,
    /// Exclusion quantile (default 0.05, i.e. threshold odds 1:19).
    pub quantile_p: f64,
}

impl Default for MacroscopicityOptions {
    fn default() -> Self {
        Self {
            scan_points: DEFAULT_SIGMA_SCAN_POINTS,
            quantile_p: DEFAULT_QUANTILE_P,
        }
    }
}

/// Maximizes τ_m over σ_q given an arbitrary evaluator: a log-spaced scan
/// of `options.scan_points` points over `sigma_q_range = (lo, hi)` followed
/// by golden-section refinement of the best interior bracket to relative
/// σ_q tolerance 1e-3.  An endpoint maximum is flagged instead of refined.
pub fn maximize_over_sigma(
    sigma_q_range: (f64, f64),
    options: &MacroscopicityOptions,
    tau_m_at: &mut dyn FnMut(f64) -> Result<f64>,
) -> Result<MacroscopicityReport> {
    let (lo, hi) = sigma_q_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Config(format!(
            "sigma_q range must satisfy 0 < lo < hi, got ({lo:e}, {hi:e})"
        )));
    }
    if options.scan_points < 2 {
        return Err(Error::Config(
            "sigma_q scan needs at least two points".into(),
        ));
    }
    let n = options.scan_points;
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut samples = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let s = (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp();
        let tm = tau_m_at(s)?;
        samples.push(s);
        values.push(tm);
    }
    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("scan is non-empty");

    let boundary = best == 0 || best == n - 1;
    let (sigma_q_star, tau_m_star) = if boundary {
        (samples[best], values[best])
    } else {
        golden_section_max(
            samples[best - 1].ln(),
            samples[best + 1].ln(),
            1e-3,
            &mut |ls: f64| tau_m_at(ls.exp()),
        )
        .map(|(ls, tm)| (ls.exp(), tm))?
    };

    Ok(MacroscopicityReport {
        sigma_q_samples: samples,
        tau_m_values: values,
        sigma_q_star,
        tau_m_star,
        mu_m: tau_m_star.log10(),
        boundary_maximum: boundary,
        prior_protocol: None,
    })
}

/// Golden-section search for the maximum of `f` on [a, b] (in the
/// transformed coordinate), stopping when the bracket shrinks below
/// `rel_tol` relative to the coordinate scale.
fn golden_section_max(
    mut a: f64,
    mut b: f64,
    rel_tol: f64,
    f: &mut dyn FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    // The bracket is in ln sigma_q, so an absolute tolerance on it is a
    // relative tolerance on sigma_q itself.
    while (b - a).abs() > rel_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d)?;
        }
    }
    if fc > fd {
        Ok((c, fc))
    } else {
        Ok((d, fd))
    }
}

/// End-to-end macroscopicity: at each scanned σ_q, builds the Jeffreys'
/// prior from `prior_design`, updates it with `data`, extracts the
/// exclusion quantile τ_m, and maximizes over σ_q.
pub fn maximize_macroscopicity<M: ExperimentModel>(
    model: &M,
    prior_design: &[(M::Context, f64)],
    data: &Dataset<M::Outcome, M::Context>,
    grid: &LogTauGrid,
    sigma_q_range: (f64, f64),
    options: &MacroscopicityOptions,
) -> Result<MacroscopicityReport> {
    maximize_over_sigma(sigma_q_range, options, &mut |sigma_q| {
        let sigma = SigmaScales::new(sigma_q, 0.0)?;
        let prior = jeffreys_prior(model, prior_design, &sigma, grid)?;
        let posterior = posterior_update(&prior, model, data, &sigma)?;
        posterior.quantile(options.quantile_p)
    })
}

/// Picks the least favorable measurement protocol: the one whose
/// prior-only exclusion quantile τ_m is smallest.  Returns the index into
/// `protocols` and that τ_m, so reports can record which protocol seeded
/// the prior.
pub fn least_favorable_protocol<M: ExperimentModel>(
    model: &M,
    protocols: &[(String, Vec<(M::Context, f64)>)],
    sigma: &SigmaScales,
    grid: &LogTauGrid,
    quantile_p: f64,
) -> Result<(usize, f64)> {
    if protocols.is_empty() {
        return Err(Error::Config("no protocols to select from".into()));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, (_, design)) in protocols.iter().enumerate() {
        let prior = jeffreys_prior(model, design, sigma, grid)?;
        let tau_m = prior.quantile(quantile_p)?;
        if best.is_none() || tau_m < best.unwrap().1 {
            best = Some((i, tau_m));
        }
    }
    Ok(best.expect("protocols is non-empty"))
}
