//! Shared domain types: modification parameters, outcome spaces, datasets,
//! and the experiment-model interface consumed by the inference engine.
//!
//! All quantities are SI: times in seconds, momenta in kg·m/s, lengths in
//! metres.  The mass-amplification ratio (m/m_e)² is applied inside each
//! model from the particle mass it stores; callers never pass it.

use thiserror::Error as ThisError;

use crate::units::HBAR;

/// Relativistic lower bound on the coherence length ħ/σ_q, in metres.
pub const MIN_COHERENCE_LENGTH_M: f64 = 1e-14;

/// Upper bound on the displacement scale σ_s, in metres.
pub const MAX_SIGMA_S_M: f64 = 2e-11;

/// Library-wide error type.  The three broad categories map onto the CLI
/// exit codes: configuration errors → 2, data errors → 3, numerical errors
/// (including the structured variants below) → 4.
#[derive(Debug, Clone, ThisError)]
pub enum Error {
    /// Invalid parameters, configuration files, or API misuse.
    #[error("configuration error: {0}")]
    Config(String),
    /// Invalid or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),
    /// A numerical routine failed or produced an invalid value.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// The prior integral diverges on the grid; carries the measured
    /// log-log tail slopes so the offending limit can be identified.
    #[error(
        "prior is not normalizable on the grid: small-tau log-log slope \
         {small_tau_slope:.3} (needs > -1), large-tau slope \
         {large_tau_slope:.3} (needs < -1)"
    )]
    NonNormalizablePrior {
        small_tau_slope: f64,
        large_tau_slope: f64,
    },
    /// Too much posterior mass against a grid edge; the grid range should
    /// be extended before the quantile can be trusted.
    #[error(
        "fraction {mass_fraction:.3} of the posterior mass lies in the \
         outermost grid bins; extend the log-tau grid range"
    )]
    BoundaryMass { mass_fraction: f64 },
}

impl Error {
    /// Process exit code used by the CLI: 2 configuration, 3 data,
    /// 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<crate::specfun::SpecFunError> for Error {
    fn from(e: crate::specfun::SpecFunError) -> Self {
        Error::Numerical(e.to_string())
    }
}

impl From<crate::quad::QuadError> for Error {
    fn from(e: crate::quad::QuadError) -> Self {
        Error::Numerical(e.to_string())
    }
}

/// The parameters (τ_e, σ_q, σ_s) of a classicalizing modification: the
/// coherence time scale and the momentum- and length-scales on which the
/// modification acts.
///
/// `tau_e = f64::INFINITY` is accepted and denotes the unmodified quantum
/// limit; it is useful for generating reference data and limit tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModificationParams {
    tau_e: f64,
    sigma_q: f64,
    sigma_s: f64,
}

impl ModificationParams {
    /// Validates the physical bounds: τ_e > 0, ħ/σ_q ≥ 10 fm, and
    /// 0 ≤ σ_s ≤ 20 pm.
    pub fn new(tau_e_s: f64, sigma_q_kg_m_per_s: f64, sigma_s_m: f64) -> Result<Self> {
        if !(tau_e_s > 0.0) {
            return Err(Error::Config(format!(
                "tau_e must be positive, got {tau_e_s} s"
            )));
        }
        if !sigma_q_kg_m_per_s.is_finite() || sigma_q_kg_m_per_s <= 0.0 {
            return Err(Error::Config(format!(
                "sigma_q must be positive and finite, got {sigma_q_kg_m_per_s} kg m/s"
            )));
        }
        let coherence_length = HBAR / sigma_q_kg_m_per_s;
        if coherence_length < MIN_COHERENCE_LENGTH_M {
            return Err(Error::Config(format!(
                "hbar/sigma_q = {coherence_length:.3e} m violates the \
                 relativistic bound of {MIN_COHERENCE_LENGTH_M:.0e} m"
            )));
        }
        if !(sigma_s_m >= 0.0) || sigma_s_m > MAX_SIGMA_S_M {
            return Err(Error::Config(format!(
                "sigma_s must lie in [0, {MAX_SIGMA_S_M:.0e}] m, got {sigma_s_m} m"
            )));
        }
        Ok(Self {
            tau_e: tau_e_s,
            sigma_q: sigma_q_kg_m_per_s,
            sigma_s: sigma_s_m,
        })
    }

    /// Parameters of the unmodified quantum limit (τ_e → ∞) at the given
    /// momentum scale.
    pub fn quantum_limit(sigma_q_kg_m_per_s: f64) -> Result<Self> {
        Self::new(f64::INFINITY, sigma_q_kg_m_per_s, 0.0)
    }

    /// Same scales, different coherence time.
    pub fn with_tau(&self, tau_e_s: f64) -> Result<Self> {
        Self::new(tau_e_s, self.sigma_q, self.sigma_s)
    }

    /// Coherence time scale τ_e in seconds (possibly infinite).
    pub fn tau_e(&self) -> f64 {
        self.tau_e
    }

    /// Momentum scale σ_q in kg·m/s.
    pub fn sigma_q(&self) -> f64 {
        self.sigma_q
    }

    /// Displacement scale σ_s in metres.
    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }

    /// All shipped models act on momentum only; they call this to reject a
    /// nonzero displacement scale.
    pub fn require_zero_sigma_s(&self, model_name: &str) -> Result<()> {
        if self.sigma_s != 0.0 {
            return Err(Error::Config(format!(
                "{model_name} requires sigma_s = 0, got {} m",
                self.sigma_s
            )));
        }
        Ok(())
    }
}

/// The scale parameters of a modification with the coherence time left
/// free, as used when computing a prior over τ_e.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaScales {
    sigma_q: f64,
    sigma_s: f64,
}

impl SigmaScales {
    pub fn new(sigma_q_kg_m_per_s: f64, sigma_s_m: f64) -> Result<Self> {
        // Reuse the full validation with a placeholder finite tau.
        let p = ModificationParams::new(1.0, sigma_q_kg_m_per_s, sigma_s_m)?;
        Ok(Self {
            sigma_q: p.sigma_q,
            sigma_s: p.sigma_s,
        })
    }

    /// Fixes the coherence time, yielding full modification parameters.
    pub fn at_tau(&self, tau_e_s: f64) -> Result<ModificationParams> {
        ModificationParams::new(tau_e_s, self.sigma_q, self.sigma_s)
    }

    pub fn sigma_q(&self) -> f64 {
        self.sigma_q
    }

    pub fn sigma_s(&self) -> f64 {
        self.sigma_s
    }
}

/// The set of outcomes a model can produce for a given run context.
#[derive(Debug, Clone)]
pub enum OutcomeSpace<O> {
    /// A finite list of distinct outcome labels.
    Discrete(Vec<O>),
    /// A real interval [lo, hi] carrying a probability density.
    Continuous { lo: f64, hi: f64 },
}

impl<O: PartialEq + std::fmt::Debug> OutcomeSpace<O> {
    /// A discrete space; labels must be unique and non-empty.
    pub fn discrete(labels: Vec<O>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Config("discrete outcome space is empty".into()));
        }
        for (i, a) in labels.iter().enumerate() {
            for b in labels.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::Config(format!(
                        "duplicate outcome label {a:?} in discrete space"
                    )));
                }
            }
        }
        Ok(OutcomeSpace::Discrete(labels))
    }

    /// A continuous interval; requires finite lo < hi.
    pub fn continuous(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::Config(format!(
                "continuous outcome interval requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(OutcomeSpace::Continuous { lo, hi })
    }
}

/// A single experimental run: an observed outcome, the context it was
/// observed in (delay time, protocol, interferometer phase, …) and a
/// positive integer weight so published histograms can be ingested without
/// expanding to per-event rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Run<O, C> {
    outcome: O,
    context: C,
    weight: u64,
}

impl<O, C> Run<O, C> {
    /// A run with unit weight.
    pub fn new(outcome: O, context: C) -> Self {
        Self {
            outcome,
            context,
            weight: 1,
        }
    }

    /// A run representing `weight` identical repetitions (weight ≥ 1).
    pub fn with_weight(outcome: O, context: C, weight: u64) -> Result<Self> {
        if weight == 0 {
            return Err(Error::Data("run weight must be at least 1".into()));
        }
        Ok(Self {
            outcome,
            context,
            weight,
        })
    }

    pub fn outcome(&self) -> &O {
        &self.outcome
    }

    pub fn context(&self) -> &C {
        &self.context
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }
}

/// An ordered collection of runs from one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<O, C> {
    experiment_id: String,
    runs: Vec<Run<O, C>>,
}

impl<O, C> Dataset<O, C> {
    pub fn new(experiment_id: impl Into<String>, runs: Vec<Run<O, C>>) -> Self {
        Self {
            experiment_id: experiment_id.into(),
            runs,
        }
    }

    pub fn experiment_id(&self) -> &str {
        &self.experiment_id
    }

    pub fn runs(&self) -> &[Run<O, C>] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Total number of repetitions, counting weights.
    pub fn total_weight(&self) -> u64 {
        self.runs.iter().map(Run::weight).sum()
    }
}

/// Behavioral contract of an experiment: an outcome space per context and
/// the log-likelihood log P(d | τ_e, σ, context).
///
/// Implementations must keep discrete outcome probabilities summing to one
/// (within 1e-10) and continuous densities integrating to one (within
/// 1e-3) for every admissible context and parameter set, and must keep the
/// log-likelihood continuous in τ_e on (0, ∞) with finite limits at both
/// ends (the classical and quantum limits).
pub trait ExperimentModel: Sync {
    type Outcome: Clone + PartialEq + std::fmt::Debug;
    type Context: Clone + std::fmt::Debug;

    /// Identifier used in error messages and reports.
    fn name(&self) -> &str;

    fn outcome_space(&self, context: &Self::Context) -> OutcomeSpace<Self::Outcome>;

    /// log P(outcome | context, params).  May be −∞ for an outcome of
    /// probability exactly zero under the supplied parameters; NaN or +∞
    /// indicate a defect and are rejected by the dataset accumulator.
    fn log_likelihood(
        &self,
        outcome: &Self::Outcome,
        context: &Self::Context,
        params: &ModificationParams,
    ) -> Result<f64>;

    /// Whether the model exposes a joint likelihood with a heating-survival
    /// event for conditioning (see the inference engine).
    fn supports_heating_conditioning(&self) -> bool {
        false
    }

    /// log P(outcome, survival | context, params): the joint probability of
    /// the outcome and the heating-survival event the data were selected on.
    fn log_joint_with_heating(
        &self,
        _outcome: &Self::Outcome,
        _context: &Self::Context,
        _params: &ModificationParams,
    ) -> Result<f64> {
        Err(Error::Config(format!(
            "{} does not expose a heating-survival joint likelihood",
            self.name()
        )))
    }

    /// log P(survival | context, params): the marginal probability of the
    /// heating-survival event.
    fn log_heating_marginal(
        &self,
        _context: &Self::Context,
        _params: &ModificationParams,
    ) -> Result<f64> {
        Err(Error::Config(format!(
            "{} does not expose a heating-survival marginal",
            self.name()
        )))
    }

    /// Expectation E_d[g(d)] over the outcome distribution at the given
    /// context and parameters: an exact sum for discrete spaces, quadrature
    /// with the stated absolute tolerance for continuous ones.  The model
    /// owns the integration scheme so it can split at the integrable
    /// features only it knows about.
    ///
    /// `g` values multiplied by zero probability are skipped, so `g` may be
    /// ill-defined on outcomes of probability zero.
    fn expectation(
        &self,
        context: &Self::Context,
        params: &ModificationParams,
        g: &dyn Fn(&Self::Outcome) -> f64,
        abs_tol: f64,
    ) -> Result<f64>;

    /// Stride hint for Fisher-information evaluation on a log-τ grid.  The
    /// default 1 evaluates every grid point; a model whose single-run
    /// Fisher information is expensive and smooth in log τ may declare a
    /// larger stride and the prior is filled in between by log-linear
    /// interpolation.
    fn fisher_grid_stride(&self) -> usize {
        1
    }
}

/// Exact-sum expectation for models with discrete outcome spaces.
pub fn discrete_expectation<M: ExperimentModel + ?Sized>(
    model: &M,
    context: &M::Context,
    params: &ModificationParams,
    g: &dyn Fn(&M::Outcome) -> f64,
) -> Result<f64> {
    match model.outcome_space(context) {
        OutcomeSpace::Discrete(outcomes) => {
            let mut total = 0.0;
            for outcome in &outcomes {
                let lp = model.log_likelihood(outcome, context, params)?;
                let p = lp.exp();
                if p > 0.0 {
                    total += p * g(outcome);
                }
            }
            Ok(total)
        }
        OutcomeSpace::Continuous { .. } => Err(Error::Config(format!(
            "discrete_expectation called on the continuous model {}",
            model.name()
        ))),
    }
}

/// Sum of weighted log-likelihoods over a dataset, accumulated in log
/// space.  An empty dataset contributes 0.  A −∞ log-likelihood (an
/// outcome impossible under the parameters) short-circuits to −∞, which
/// downstream updating treats as zero posterior mass at those parameters;
/// NaN or +∞ is reported as a numerical error carrying the run index.
pub fn dataset_log_likelihood<M: ExperimentModel + ?Sized>(
    model: &M,
    data: &Dataset<M::Outcome, M::Context>,
    params: &ModificationParams,
) -> Result<f64> {
    let mut total = 0.0;
    for (index, run) in data.runs().iter().enumerate() {
        let lp = model
            .log_likelihood(run.outcome(), run.context(), params)
            .map_err(|e| with_run_index(e, index))?;
        if lp.is_nan() || lp == f64::INFINITY {
            return Err(Error::Numerical(format!(
                "non-finite log-likelihood {lp} at run {index} \
                 (tau_e = {:e} s, sigma_q = {:e} kg m/s)",
                params.tau_e(),
                params.sigma_q()
            )));
        }
        if lp == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += run.weight() as f64 * lp;
    }
    Ok(total)
}

fn with_run_index(e: Error, index: usize) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("run {index}: {m}")),
        Error::Data(m) => Error::Data(format!("run {index}: {m}")),
        Error::Numerical(m) => Error::Numerical(format!("run {index}: {m}")),
        other => other,
    }
}

#[cfg(test)]
pub(crate) mod test_models {
    use super::*;

    /// Two-outcome decay model: P(true | τ) = e^{−t/τ}, P(false | τ) =
    /// 1 − e^{−t/τ}, with the wait time t as context.  Used across the
    /// crate's tests as the minimal nontrivial model.
    pub struct ToyDecay;

    impl ExperimentModel for ToyDecay {
        type Outcome = bool;
        type Context = f64;

        fn name(&self) -> &str {
            "toy-decay"
        }

        fn outcome_space(&self, _context: &f64) -> OutcomeSpace<bool> {
            OutcomeSpace::Discrete(vec![true, false])
        }

        fn log_likelihood(
            &self,
            outcome: &bool,
            context: &f64,
            params: &ModificationParams,
        ) -> Result<f64> {
            let x = context / params.tau_e();
            if *outcome {
                Ok(-x)
            } else {
                // 1 - e^{-x} via exp_m1 keeps full relative accuracy for
                // small x, which the Fisher-information differencing needs.
                Ok((-(-x).exp_m1()).ln())
            }
        }

        fn expectation(
            &self,
            context: &f64,
            params: &ModificationParams,
            g: &dyn Fn(&bool) -> f64,
            _abs_tol: f64,
        ) -> Result<f64> {
            discrete_expectation(self, context, params, g)
        }
    }
}
