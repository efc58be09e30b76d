//! Two-mode Bose–Einstein-condensate interferometry under a classicalizing
//! momentum-diffusion channel.
//!
//! A condensate of `N` atoms split between two wells (or two motional modes
//! of one well) is a collective spin `J₀ = N/2`.  The momentum-diffusion
//! channel acts on each atom with a rate amplified by `(m_atom/m_e)²` and a
//! Gaussian momentum kernel of width `σ_q`; averaging the kernel over the
//! condensate mode functions yields three collective rates:
//!
//! * `Γ_P` — phase flips between the wells (J_z dephasing of the fringe),
//! * `Γ_L` — per-atom heating out of the condensed mode ("loss"),
//! * `Γ_C` — decay of inter-well single-particle coherence,
//!
//! and, for the single-well interferometer, the rate `Γ_S` of collective
//! spin-mixing driven by kicks that excite the softest trap axis.
//!
//! The double-well fringe observable is the atom-number imbalance `m`; its
//! density is a wrapped-Gaussian (Jacobi ϑ₃) mixture over the surviving
//! atom number, conditioned on the heating-survival event actually used to
//! select the data (at least `⌈f·J₀⌉` atoms remaining).

use std::sync::{Arc, Mutex};

use crate::bayes;
use crate::domain::{
    Dataset, Error, ExperimentModel, ModificationParams, OutcomeSpace, Result, Run,
};
use crate::quad;
use crate::rng::SeededRng;
use crate::specfun::{log_binomial, theta3};
use crate::units::{mass_ratio_sq, HBAR, M_RB87};

/// ln(1e-300): below this log-marginal the survival event is numerically
/// impossible and the conditioned outcome distribution carries no mass.
const LOG_MIN_SURVIVAL: f64 = -690.775_527_898_213_7;

/// Relative slack allowed on ⟨J_z²⟩₀⟨J_y²⟩₀ ≥ J₀²/4.  Squeezed states of
/// finite J sit slightly below the product bound (the bound involves
/// |⟨J_x⟩| < J₀), so a strict inequality would reject physical inputs.
const UNCERTAINTY_SLACK: f64 = 1e-2;

/// Experimental configuration of the condensate interferometer.
#[derive(Debug, Clone)]
pub struct BecParams {
    /// Initial atom number N (even, so J₀ = N/2 is an integer).
    pub n_atoms: u32,
    /// Well separation Δx in metres.
    pub separation_m: f64,
    /// Trap angular frequencies (ω_x, ω_y, ω_z) in rad/s.
    pub omega_rad_per_s: [f64; 3],
    /// Tunnel/drive angular rate ε/ħ in rad/s (fringe phase advances as εt/ħ).
    pub epsilon_over_hbar_rad_per_s: f64,
    /// Interaction shear rate ζ in rad/s.
    pub shear_rad_per_s: f64,
    /// Initial number-difference variance ⟨J_z²⟩₀.
    pub jz_var0: f64,
    /// Initial ⟨J_y²⟩₀ (anti-squeezed quadrature of the prepared state).
    pub jy_var0: f64,
    /// Atom mass in kg.
    pub atom_mass_kg: f64,
    /// Survival fraction f defining the heating window J ≥ ⌈f·J₀⌉.
    pub heat_survival_fraction: f64,
}

impl Default for BecParams {
    /// The shipped double-well configuration: 1200 ⁸⁷Rb atoms, 2 µm well
    /// separation, a pancake trap with a soft 13.2 Hz axis, a 2.19 kHz
    /// tunnel rate, 4 Hz shear, and a number-squeezed input with
    /// ⟨J_z²⟩₀ = 0.41²·J₀/2 whose partner variance saturates the
    /// minimal-uncertainty product J₀²/4.
    fn default() -> Self {
        let n_atoms = 1200_u32;
        let j0 = f64::from(n_atoms) / 2.0;
        let jz_var0 = 0.41 * 0.41 * j0 / 2.0;
        Self {
            n_atoms,
            separation_m: 2.0e-6,
            omega_rad_per_s: [
                2.0 * std::f64::consts::PI * 1.44e3,
                2.0 * std::f64::consts::PI * 1.84e3,
                2.0 * std::f64::consts::PI * 13.2,
            ],
            epsilon_over_hbar_rad_per_s: 2.19e3,
            shear_rad_per_s: 4.0,
            jz_var0,
            jy_var0: j0 * j0 / (4.0 * jz_var0),
            atom_mass_kg: M_RB87,
            heat_survival_fraction: 0.9,
        }
    }
}

impl BecParams {
    /// Total collective spin J₀ = N/2.
    #[must_use]
    pub fn j0(&self) -> f64 {
        f64::from(self.n_atoms) / 2.0
    }

    /// Ground-state widths σ_i = √(ħ/2mω_i) of the three trap axes, metres.
    #[must_use]
    pub fn harmonic_mode_widths(&self) -> [f64; 3] {
        let m = self.atom_mass_kg;
        [
            (HBAR / (2.0 * m * self.omega_rad_per_s[0])).sqrt(),
            (HBAR / (2.0 * m * self.omega_rad_per_s[1])).sqrt(),
            (HBAR / (2.0 * m * self.omega_rad_per_s[2])).sqrt(),
        ]
    }
}

/// Collective decoherence rates (1/s) of the condensate under a
/// modification with given (τ_e, σ_q).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BecRates {
    /// Inter-well phase-flip rate Γ_P.
    pub gamma_p: f64,
    /// Single-well spin-mixing rate Γ_S.
    pub gamma_s: f64,
    /// Per-atom heating ("loss") rate Γ_L.
    pub gamma_l: f64,
    /// Single-particle inter-well coherence decay rate Γ_C.
    pub gamma_c: f64,
}

/// Everything the likelihood needs at one (delay, τ_e, σ_q) point.
#[derive(Debug)]
struct DelayState {
    t: f64,
    tau_e: f64,
    sigma_q: f64,
    /// Fringe phase εt/ħ.
    phase: f64,
    /// Phase variance λ(t); the ϑ₃ nome is e^{−λ}.
    lam: f64,
    nome: f64,
    /// Surviving-spin mixture components (J, conditional weight).
    active: Vec<(f64, f64)>,
    /// log P(survival window).
    log_marginal: f64,
}

/// The double-well interferometer as a Bayesian experiment model; also
/// exposes the single-well rate and moment laws.
#[derive(Debug)]
pub struct BecModel {
    params: BecParams,
    /// log C(J₀, J) for J = 0..=J₀.
    log_binom: Vec<f64>,
    /// Lower edge ⌈f·J₀⌉ of the survival window, in units of J.
    j_min: u32,
    /// Most recent delay states; repeated likelihood calls share contexts.
    cache: Mutex<Vec<Arc<DelayState>>>,
}

impl BecModel {
    /// Validates the configuration and precomputes the survival-window
    /// combinatorics.
    ///
    /// # Errors
    ///
    /// [`Error::Config`] for a non-positive or non-finite scale, an odd or
    /// tiny atom number, a survival fraction outside (0, 1), or initial
    /// variances violating the uncertainty product J₀²/4 beyond the slack
    /// allowed for finite-J squeezed states.
    pub fn new(params: BecParams) -> Result<Self> {
        if params.n_atoms < 2 || params.n_atoms % 2 != 0 {
            return Err(Error::Config(format!(
                "atom number must be even and at least 2, got {}",
                params.n_atoms
            )));
        }
        if !(params.separation_m > 0.0) || !params.separation_m.is_finite() {
            return Err(Error::Config(format!(
                "well separation must be positive, got {} m",
                params.separation_m
            )));
        }
        for (axis, &w) in ["x", "y", "z"].iter().zip(&params.omega_rad_per_s) {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Config(format!(
                    "trap frequency omega_{axis} must be positive, got {w} rad/s"
                )));
            }
        }
        if !(params.epsilon_over_hbar_rad_per_s >= 0.0)
            || !params.epsilon_over_hbar_rad_per_s.is_finite()
        {
            return Err(Error::Config(format!(
                "tunnel rate must be non-negative, got {} rad/s",
                params.epsilon_over_hbar_rad_per_s
            )));
        }
        if !(params.shear_rad_per_s >= 0.0) || !params.shear_rad_per_s.is_finite() {
            return Err(Error::Config(format!(
                "shear rate must be non-negative, got {} rad/s",
                params.shear_rad_per_s
            )));
        }
        if !(params.atom_mass_kg > 0.0) || !params.atom_mass_kg.is_finite() {
            return Err(Error::Config(format!(
                "atom mass must be positive, got {} kg",
                params.atom_mass_kg
            )));
        }
        let j0 = params.j0();
        if !(params.jz_var0 > 0.0) || !(params.jy_var0 > 0.0) {
            return Err(Error::Config(format!(
                "initial variances must be positive, got jz_var0 = {}, jy_var0 = {}",
                params.jz_var0, params.jy_var0
            )));
        }
        let bound = j0 * j0 / 4.0;
        if params.jz_var0 * params.jy_var0 < bound * (1.0 - UNCERTAINTY_SLACK) {
            return Err(Error::Config(format!(
                "variance product {} violates the uncertainty bound {bound}",
                params.jz_var0 * params.jy_var0
            )));
        }
        let f = params.heat_survival_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!(
                "survival fraction must lie in (0, 1), got {f}"
            )));
        }
        // Snap f·J₀ to the nearest integer before taking the ceiling so a
        // fraction intended to hit an integer edge is not pushed one level
        // up by float noise.
        let raw = f * j0;
        let snapped = if (raw - raw.round()).abs() < 1e-6 {
            raw.round()
        } else {
            raw
        };
        let j_min = snapped.ceil() as u32;
        let j0_u = params.n_atoms / 2;
        let log_binom = (0..=j0_u)
            .map(|j| {
                log_binomial(u64::from(j0_u), u64::from(j))
                    .map_err(|e| Error::Numerical(e.to_string()))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            params,
            log_binom,
            j_min,
            cache: Mutex::new(Vec::with_capacity(4)),
        })
    }

    #[must_use]
    pub fn params(&self) -> &BecParams {
        &self.params
    }

    /// Lower edge of the heating-survival window, ⌈f·J₀⌉.
    #[must_use]
    pub fn survival_window_floor(&self) -> u32 {
        self.j_min
    }

    // ---- dimensionless kick-average coefficients --------------------------

    /// (a_x, a_y, a_z) with a_i = 2 σ_i² σ_q²/ħ², plus the fringe-kick
    /// argument Δx²/(4σ_x² + 2(ħ/σ_q)²) shared by Γ_P and Γ_C.
    fn kick_scales(&self, sigma_q: f64) -> ([f64; 3], f64) {
        let xc = HBAR / sigma_q;
        let w = self.params.harmonic_mode_widths();
        let a = [
            2.0 * (w[0] / xc).powi(2),
            2.0 * (w[1] / xc).powi(2),
            2.0 * (w[2] / xc).powi(2),
        ];
        let d = self.params.separation_m;
        let arg = d * d / (4.0 * w[0] * w[0] + 2.0 * xc * xc);
        (a, arg)
    }

    /// Dimensionless phase-flip coefficient: Γ_P · τ_e · (m_e/m_atom)².
    /// The in-plane kernel average of the squared fringe-flip amplitude;
    /// the soft axis is quasi-free and drops out.
    fn phase_flip_coeff(&self, sigma_q: f64) -> f64 {
        let (a, arg) = self.kick_scales(sigma_q);
        let root_ab_inv = (-0.5 * (a[0].ln_1p() + a[1].ln_1p())).exp();
        2.0 * (-(-arg).exp_m1()) * root_ab_inv
    }

    /// Dimensionless per-atom heating coefficient: Γ_L · τ_e · (m_e/m_atom)².
    fn loss_coeff(&self, sigma_q: f64) -> f64 {
        let (a, _) = self.kick_scales(sigma_q);
        -(-0.5 * (a[0].ln_1p() + a[1].ln_1p())).exp_m1()
    }

    /// Mean of cos(Δx·q_x/ħ)·exp(−Σ σ_i² q_i²/ħ²) over the isotropic kick
    /// distribution N(0, σ_q² I), by tensor Gauss–Hermite quadrature.  Each
    /// axis is rescaled to absorb its Gaussian damping factor into the
    /// quadrature weight (an exact change of variables), which keeps the
    /// oscillation count of the x-axis factor bounded.
    fn damped_cos_mean(&self, sigma_q: f64, nodes: usize) -> f64 {
        let (a, _) = self.kick_scales(sigma_q);
        let c = std::f64::consts::SQRT_2 * self.params.separation_m / (HBAR / sigma_q);
        let ct = c / (1.0 + a[0]).sqrt();
        let (xs, ws) = quad::gauss_hermite(nodes);
        let mut total = 0.0;
        for (k, &vx) in xs.iter().enumerate() {
            let fx = ws[k] * (ct * vx).cos();
            for (l, _) in xs.iter().enumerate() {
                let fxy = fx * ws[l];
                for (mi, _) in xs.iter().enumerate() {
                    total += fxy * ws[mi];
                }
            }
        }
        let scale =
            (-0.5 * (a[0].ln_1p() + a[1].ln_1p() + a[2].ln_1p())).exp();
        total / std::f64::consts::PI.powf(1.5) * scale
    }

    /// Mean of (σ_z² q_z²/ħ²)·exp(−Σ σ_i² q_i²/ħ²) over N(0, σ_q² I): the
    /// squared overlap driving single-well spin mixing, by the same
    /// rescaled tensor quadrature.
    fn damped_z_excitation_mean(&self, sigma_q: f64, nodes: usize) -> f64 {
        let (a, _) = self.kick_scales(sigma_q);
        let (xs, ws) = quad::gauss_hermite(nodes);
        let zf = a[2] / (1.0 + a[2]);
        let mut total = 0.0;
        for (k, _) in xs.iter().enumerate() {
            let fx = ws[k];
            for (l, _) in xs.iter().enumerate() {
                let fxy = fx * ws[l];
                for (mi, &vz) in xs.iter().enumerate() {
                    total += fxy * ws[mi] * zf * vz * vz;
                }
            }
        }
        let scale =
            (-0.5 * (a[0].ln_1p() + a[1].ln_1p() + a[2].ln_1p())).exp();
        total / std::f64::consts::PI.powf(1.5) * scale
    }

    /// Doubles the tensor-quadrature order from 16 until the result is
    /// stable to 1e-8 relative.
    fn converged_kick_mean(
        &self,
        sigma_q: f64,
        kernel: impl Fn(&Self, f64, usize) -> f64,
    ) -> Result<f64> {
        let mut nodes = 16;
        let mut prev = kernel(self, sigma_q, nodes);
        while nodes < 256 {
            nodes *= 2;
            let next = kernel(self, sigma_q, nodes);
            if (next - prev).abs() <= 1e-8 * next.abs().max(1e-30) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Numerical(format!(
            "kick-average quadrature did not stabilize at sigma_q = {sigma_q:e}"
        )))
    }

    // ---- rates -------------------------------------------------------------

    /// Per-mass-ratio rate prefactor (m_atom/m_e)²/τ_e; zero in the quantum
    /// limit τ_e → ∞.
    fn rate_prefactor(&self, params: &ModificationParams) -> f64 {
        mass_ratio_sq(self.params.atom_mass_kg) / params.tau_e()
    }

    /// Fast path for the likelihood: (Γ_P, Γ_L) from the closed-form
    /// in-plane kernel averages.
    fn dephasing_rates(&self, params: &ModificationParams) -> (f64, f64) {
        let rate0 = self.rate_prefactor(params);
        if rate0 == 0.0 {
            return (0.0, 0.0);
        }
        let sq = params.sigma_q();
        (
            rate0 * self.phase_flip_coeff(sq),
            rate0 * self.loss_coeff(sq),
        )
    }

    /// All double-well rates.  Γ_P and Γ_L come from closed-form kernel
    /// averages; Γ_C keeps its defining three-dimensional average, done by
    /// converged tensor quadrature (the likelihood never needs Γ_C, so the
    /// quadrature cost stays out of the hot path).  Γ_S is zero here.
    ///
    /// # Errors
    ///
    /// [`Error::Config`] for a nonzero displacement scale;
    /// [`Error::Numerical`] if the Γ_C quadrature fails to stabilize.
    pub fn rates_double_well(&self, params: &ModificationParams) -> Result<BecRates> {
        params.require_zero_sigma_s(self.name())?;
        let rate0 = self.rate_prefactor(params);
        if rate0 == 0.0 {
            return Ok(BecRates {
                gamma_p: 0.0,
                gamma_s: 0.0,
                gamma_l: 0.0,
                gamma_c: 0.0,
            });
        }
        let sq = params.sigma_q();
        let cos_mean = self.converged_kick_mean(sq, Self::damped_cos_mean)?;
        Ok(BecRates {
            gamma_p: rate0 * self.phase_flip_coeff(sq),
            gamma_s: 0.0,
            gamma_l: rate0 * self.loss_coeff(sq),
            gamma_c: rate0 * (1.0 - cos_mean),
        })
    }

    /// Single-well rates: only the spin-mixing rate Γ_S is nonzero (the
    /// co-located modes see no differential phase kick, and heating out of
    /// the soft axis is the signal itself, not a loss channel).  The mode
    /// overlap is averaged by converged tensor quadrature.
    ///
    /// # Errors
    ///
    /// As for [`Self::rates_double_well`].
    pub fn rates_single_well(&self, params: &ModificationParams) -> Result<BecRates> {
        params.require_zero_sigma_s(self.name())?;
        let rate0 = self.rate_prefactor(params);
        if rate0 == 0.0 {
            return Ok(BecRates {
                gamma_p: 0.0,
                gamma_s: 0.0,
                gamma_l: 0.0,
                gamma_c: 0.0,
            });
        }
        let sq = params.sigma_q();
        let overlap = self.converged_kick_mean(sq, Self::damped_z_excitation_mean)?;
        Ok(BecRates {
            gamma_p: 0.0,
            gamma_s: 4.0 * rate0 * overlap,
            gamma_l: 0.0,
            gamma_c: 0.0,
        })
    }

    // ---- fringe statistics -------------------------------------------------

    /// Phase variance λ(t) of the double-well fringe: prepared spread, phase
    /// flips, loss back-action, and interaction shear fed by both the
    /// prepared number variance and loss-induced number diffusion.
    fn phase_variance(&self, rates: &BecRates, t: f64) -> f64 {
        let j0 = self.params.j0();
        let z = self.params.shear_rad_per_s;
        self.params.jy_var0 / (2.0 * j0 * j0)
            + 0.5 * rates.gamma_p * t
            + rates.gamma_l * t / (4.0 * j0)
            + 2.0 * z * z * t * t * (self.params.jz_var0 + rates.gamma_l * j0 * t / 6.0)
    }

    /// Fringe contrast factor g(t) = e^{−λ(t)} of the double-well
    /// interferometer; it is the ϑ₃ nome of the imbalance density.
    #[must_use]
    pub fn g_factor_double_well(&self, rates: &BecRates, t: f64) -> f64 {
        (-self.phase_variance(rates, t)).exp()
    }

    /// Fringe contrast factor of the single-well interferometer:
    /// g = exp[−⟨J_y²⟩_t/(2J₀²)] with the variance growth of
    /// [`Self::single_well_jy_second_moment`].
    #[must_use]
    pub fn g_factor_single_well(&self, rates: &BecRates, t: f64) -> f64 {
        (-self.single_well_jy_second_moment(rates, t) / (2.0 * self.params.j0().powi(2)))
            .exp()
    }

    /// ⟨J_z²⟩_t under single-well spin mixing: relaxes from ⟨J_z²⟩₀ to the
    /// isotropic value (⟨J_z²⟩₀ + J₀²)/3 at rate 3Γ_S/2.
    #[must_use]
    pub fn single_well_jz_second_moment(&self, rates: &BecRates, t: f64) -> f64 {
        let j0 = self.params.j0();
        let jz = self.params.jz_var0;
        (jz + j0 * j0) / 3.0 + (2.0 * jz - j0 * j0) / 3.0 * (-1.5 * rates.gamma_s * t).exp()
    }

    /// ⟨J_y²⟩_t under shear fed by the prepared number variance and by
    /// spin-mixing diffusion: ⟨J_y²⟩₀ + 4ζ²J₀²t²(⟨J_z²⟩₀ + Γ_S J₀² t/6).
    #[must_use]
    pub fn single_well_jy_second_moment(&self, rates: &BecRates, t: f64) -> f64 {
        let j0 = self.params.j0();
        let z = self.params.shear_rad_per_s;
        self.params.jy_var0
            + 4.0 * z * z * j0 * j0 * t * t
                * (self.params.jz_var0 + rates.gamma_s * j0 * j0 * t / 6.0)
    }

    /// Imbalance density of a single surviving-spin component: the
    /// arcsine-Jacobi form
    /// p_J(m) = [ϑ₃((φ−εt)/2, g) + ϑ₃((π−φ−εt)/2, g)] / (2π√(J²−m²)),
    /// φ = arcsin(m/J), vanishing for |m| ≥ J.
    ///
    /// The J = 0 component of the loss mixture is a point mass at m = 0,
    /// not a density; it never enters here because the survival window
    /// floor ⌈f·J₀⌉ is at least 1.
    ///
    /// # Errors
    ///
    /// [`Error::Config`] if `j < 1` or the nome is outside [0, 1);
    /// [`Error::Numerical`] if ϑ₃ fails.
    pub fn imbalance_density(&self, m: f64, j: f64, nome: f64, t: f64) -> Result<f64> {
        if !(j >= 1.0) {
            return Err(Error::Config(format!(
                "imbalance density needs J >= 1, got {j}"
            )));
        }
        if !(0.0..1.0).contains(&nome) {
            return Err(Error::Config(format!(
                "fringe contrast must lie in [0, 1), got {nome}"
            )));
        }
        if m.abs() >= j {
            return Ok(0.0);
        }
        let phase = self.params.epsilon_over_hbar_rad_per_s * t;
        let phi = (m / j).asin();
        let z1 = 0.5 * (phi - phase);
        let z2 = 0.5 * (std::f64::consts::PI - phi - phase);
        let t3 = theta3(z1, nome).map_err(|e| Error::Numerical(e.to_string()))?
            + theta3(z2, nome).map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(t3 / (2.0 * std::f64::consts::PI * (j * j - m * m).sqrt()))
    }

    /// Conditional distribution of the surviving spin J over the window
    /// J ≥ ⌈f·J₀⌉, and the log-probability of the window itself.
    ///
    /// Each of the J₀ spin units survives to time t with probability
    /// e^{−Γ_L t}, independently, so J is binomial; the window mass is its
    /// upper tail.  (The complementary convention — survival probability
    /// 1 − e^{−Γ_L t} — appears in some presentations but gives all weight
    /// to total loss at Γ_L = 0; the Γ_L → 0 limit fixes the form used
    /// here.)  Components whose cumulative conditional weight is below
    /// 1e-12 are trimmed from each end.
    fn survival_window(&self, gamma_l: f64, t: f64) -> (Vec<(f64, f64)>, f64) {
        let x = gamma_l * t;
        let j0_u = self.params.n_atoms / 2;
        if x < 1e-12 {
            return (vec![(f64::from(j0_u), 1.0)], 0.0);
        }
        // log survival / loss probabilities per spin unit
        let lp = -x;
        let lq = (-(-x).exp_m1()).ln();
        let js: Vec<u32> = (self.j_min..=j0_u).collect();
        let logw: Vec<f64> = js
            .iter()
            .map(|&j| {
                self.log_binom[j as usize]
                    + f64::from(j) * lp
                    + f64::from(j0_u - j) * lq
            })
            .collect();
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logw.iter().map(|&lw| (lw - max).exp()).sum();
        let log_marginal = max + sum.ln();
        let weights: Vec<f64> = logw.iter().map(|&lw| (lw - log_marginal).exp()).collect();
        // trim negligible tails (cumulative < 1e-12 from each end)
        let mut lo = 0;
        let mut acc = 0.0;
        while lo + 1 < weights.len() && acc + weights[lo] < 1e-12 {
            acc += weights[lo];
            lo += 1;
        }
        let mut hi = weights.len();
        acc = 0.0;
        while hi > lo + 1 && acc + weights[hi - 1] < 1e-12 {
            acc += weights[hi - 1];
            hi -= 1;
        }
        let active = js[lo..hi]
            .iter()
            .zip(&weights[lo..hi])
            .map(|(&j, &w)| (f64::from(j), w))
            .collect();
        (active, log_marginal)
    }

    /// Cached per-(delay, τ_e, σ_q) state: contrast, phase, and survival
    /// mixture.  Likelihood evaluations arrive grouped by context and by
    /// the ±h parameter pair of score stencils, so a tiny most-recent list
    /// removes nearly all recomputation.
    fn delay_state(&self, t: f64, params: &ModificationParams) -> Arc<DelayState> {
        let tau_e = params.tau_e();
        let sigma_q = params.sigma_q();
        {
            let cache = self.cache.lock().expect("delay-state cache poisoned");
            if let Some(hit) = cache
                .iter()
                .find(|s| s.t == t && s.tau_e == tau_e && s.sigma_q == sigma_q)
            {
                return Arc::clone(hit);
            }
        }
        let (gamma_p, gamma_l) = self.dephasing_rates(params);
        let rates = BecRates {
            gamma_p,
            gamma_s: 0.0,
            gamma_l,
            gamma_c: 0.0,
        };
        let lam = self.phase_variance(&rates, t);
        let (active, log_marginal) = self.survival_window(gamma_l, t);
        let state = Arc::new(DelayState {
            t,
            tau_e,
            sigma_q,
            phase: self.params.epsilon_over_hbar_rad_per_s * t,
            lam,
            nome: (-lam).exp(),
            active,
            log_marginal,
        });
        let mut cache = self.cache.lock().expect("delay-state cache poisoned");
        if cache.len() >= 4 {
            cache.remove(0);
        }
        cache.push(Arc::clone(&state));
        state
    }

    /// Survival-conditioned imbalance density Σ_J w̃_J p_J(m) at one state.
    /// Returns NaN only if ϑ₃ rejects the nome, which validation precludes.
    fn mixture_density(&self, state: &DelayState, m: f64) -> f64 {
        let mut acc = 0.0;
        for &(j, w) in &state.active {
            if m.abs() >= j {
                continue;
            }
            let phi = (m / j).asin();
            let z1 = 0.5 * (phi - state.phase);
            let z2 = 0.5 * (std::f64::consts::PI - phi - state.phase);
            let t3 = match (theta3(z1, state.nome), theta3(z2, state.nome)) {
                (Ok(a), Ok(b)) => a + b,
                _ => return f64::NAN,
            };
            acc += w * t3 / (2.0 * std::f64::consts::PI * (j * j - m * m).sqrt());
        }
        acc
    }

    /// Draws `reps_per_delay` imbalance outcomes at each delay from the
    /// survival-conditioned law: the surviving spin from the window
    /// distribution, then m = J sin(εt + √(2λ)·ξ) with standard normal ξ
    /// (the wrapped-Gaussian form of the ϑ₃ density).
    ///
    /// # Errors
    ///
    /// [`Error::Config`] for invalid modification parameters or an empty
    /// delay list.
    pub fn simulate_double_well(
        &self,
        modification: &ModificationParams,
        delays_s: &[f64],
        reps_per_delay: u32,
        seed: u64,
    ) -> Result<Dataset<f64, f64>> {
        modification.require_zero_sigma_s(self.name())?;
        if delays_s.is_empty() || reps_per_delay == 0 {
            return Err(Error::Config(
                "simulation needs at least one delay and one repetition".into(),
            ));
        }
        let mut rng = SeededRng::new(seed);
        let mut runs = Vec::with_capacity(delays_s.len() * reps_per_delay as usize);
        for &t in delays_s {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::Config(format!("delay must be >= 0 s, got {t}")));
            }
            let state = self.delay_state(t, modification);
            let weights: Vec<f64> = state.active.iter().map(|&(_, w)| w).collect();
            let width = (2.0 * state.lam).sqrt();
            for _ in 0..reps_per_delay {
                let j = state.active[rng.categorical(&weights)].0;
                let psi = state.phase + width * rng.normal();
                runs.push(Run::new(j * psi.sin(), t));
            }
        }
        Ok(Dataset::new("bec-double-well", runs))
    }
}

impl ExperimentModel for BecModel {
    type Outcome = f64;
    type Context = f64;

    fn name(&self) -> &str {
        "bec-double-well"
    }

    fn outcome_space(&self, _context: &f64) -> OutcomeSpace<f64> {
        let j0 = self.params.j0();
        OutcomeSpace::continuous(-j0, j0).expect("spin bounds are finite and ordered")
    }

    fn log_likelihood(
        &self,
        outcome: &f64,
        context: &f64,
        params: &ModificationParams,
    ) -> Result<f64> {
        bayes::condition_on_heating(self, outcome, context, params)
    }

    fn supports_heating_conditioning(&self) -> bool {
        true
    }

    fn log_joint_with_heating(
        &self,
        outcome: &f64,
        context: &f64,
        params: &ModificationParams,
    ) -> Result<f64> {
        params.require_zero_sigma_s(self.name())?;
        let state = self.delay_state(*context, params);
        let f = self.mixture_density(&state, *outcome);
        if f.is_nan() {
            return Err(Error::Numerical(format!(
                "imbalance density failed at m = {outcome}, t = {context} s"
            )));
        }
        if f <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(state.log_marginal + f.ln())
    }

    fn log_heating_marginal(&self, context: &f64, params: &ModificationParams) -> Result<f64> {
        params.require_zero_sigma_s(self.name())?;
        Ok(self.delay_state(*context, params).log_marginal)
    }

    /// Quadrature of g against the survival-conditioned imbalance density.
    ///
    /// The mixture has integrable 1/√(J² − m²) edges at every component
    /// boundary and a fringe ridge near m = J sin(εt), so the integral is
    /// split there and each panel is mapped through m = a + (b−a)(1−cos πs)/2,
    /// whose endpoint-clustering absorbs the edge singularities; panels are
    /// then integrated adaptively.
    ///
    /// When the survival window itself is numerically impossible (log mass
    /// below ln 1e-300) the conditioned law carries no usable mass and the
    /// expectation is 0, matching how conditioning treats that regime.
    fn expectation(
        &self,
        context: &f64,
        params: &ModificationParams,
        g: &dyn Fn(&f64) -> f64,
        abs_tol: f64,
    ) -> Result<f64> {
        params.require_zero_sigma_s(self.name())?;
        let state = self.delay_state(*context, params);
        if state.log_marginal < LOG_MIN_SURVIVAL {
            return Ok(0.0);
        }
        let j_lo = state.active.first().expect("window is never empty").0;
        let j_hi = state.active.last().expect("window is never empty").0;
        let ridge = state.phase.sin();
        let mut edges: Vec<f64> = Vec::with_capacity(2 * state.active.len() + 4);
        for &(j, _) in &state.active {
            edges.push(-j);
            edges.push(j);
        }
        for r in [j_lo * ridge, j_hi * ridge] {
            if r.abs() < j_hi {
                edges.push(r);
            }
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let n_panels = edges.len() - 1;
        let tol_each = (abs_tol / n_panels as f64).max(1e-15);
        let mut total = 0.0;
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let integrand = |s: f64| -> f64 {
                let u = 0.5 * (1.0 - (std::f64::consts::PI * s).cos());
                let m = a + (b - a) * u;
                let f = self.mixture_density(&state, m);
                if f <= 0.0 {
                    return if f == 0.0 { 0.0 } else { f64::NAN };
                }
                let jac = (b - a) * 0.5 * std::f64::consts::PI
                    * (std::f64::consts::PI * s).sin();
                f * g(&m) * jac
            };
            total += quad::integrate(&integrand, 0.0, 1.0, tol_each).map_err(|e| {
                Error::Numerical(format!(
                    "imbalance expectation failed on panel [{a}, {b}] at t = {context} s: {e}"
                ))
            })?;
        }
        Ok(total)
    }

    /// The per-delay Fisher information is smooth in log τ_e (power-law
    /// pieces joined at the loss knee and the survival cliff), so every
    /// 32nd grid point resolves it.
    fn fisher_grid_stride(&self) -> usize {
        32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{evolve_dicke, one_axis_squeeze, shear_variance_formula};

    fn model() -> BecModel {
        BecModel::new(BecParams::default()).unwrap()
    }

    /// Modification scale matching the shipped trap geometry's coefficient
    /// peak: ħ/σ_q = 7.359025e-7 m.
    fn sigma_star() -> f64 {
        HBAR / 7.359_025e-7
    }

    #[test]
    fn default_params_saturate_the_uncertainty_product() {
        let p = BecParams::default();
        let j0 = p.j0();
        assert!((p.jz_var0 - 50.43).abs() < 1e-10);
        assert!((p.jz_var0 * p.jy_var0 - j0 * j0 / 4.0).abs() < 1e-6 * j0 * j0);
        assert_eq!(model().survival_window_floor(), 540);
    }

    #[test]
    fn validation_rejects_bad_configurations() {
        let mut p = BecParams::default();
        p.n_atoms = 1201;
        assert!(BecModel::new(p).is_err());
        let mut p = BecParams::default();
        p.heat_survival_fraction = 1.0;
        assert!(BecModel::new(p).is_err());
        let mut p = BecParams::default();
        p.jz_var0 = 1.0;
        p.jy_var0 = 1.0; // product far below J0²/4
        assert!(BecModel::new(p).is_err());
        let mut p = BecParams::default();
        p.omega_rad_per_s[2] = 0.0;
        assert!(BecModel::new(p).is_err());
    }

    #[test]
    fn mode_widths_match_direct_evaluation() {
        let p = BecParams::default();
        let w = p.harmonic_mode_widths();
        assert!((w[0] - 2.0095e-7).abs() < 1e-11);
        assert!((w[1] - 1.7777e-7).abs() < 1e-11);
        assert!((w[2] - 2.0989e-6).abs() < 1e-10);
    }

    #[test]
    fn dephasing_coefficients_match_reference_values() {
        // Independent high-precision evaluation at the coefficient peak.
        let m = model();
        let aP2 = m.phase_flip_coeff(sigma_star());
        let aL = m.loss_coeff(sigma_star());
        assert!((aP2 / 1.694_543 - 1.0).abs() < 1e-4, "got {aP2}");
        assert!((aL / 0.117_238 - 1.0).abs() < 1e-4, "got {aL}");
    }

    #[test]
    fn rate_coefficients_vanish_in_both_sigma_limits() {
        let m = model();
        // σ_q → 0 (coherence length enormous): no kicks resolve the system.
        let tiny = HBAR / 1.0e3;
        assert!(m.phase_flip_coeff(tiny) < 1e-11);
        assert!(m.loss_coeff(tiny) < 1e-11);
        // σ_q → ∞: every kick ejects the atom; loss saturates at 1 while
        // the coherent phase-flip amplitude is crushed by the form factor.
        let huge = HBAR / 1.0e-13;
        assert!(m.loss_coeff(huge) > 1.0 - 1e-10);
        assert!(m.phase_flip_coeff(huge) < 1e-10);
    }

    #[test]
    fn phase_flip_coefficient_matches_tensor_quadrature() {
        // closed form vs the defining in-plane average 2·E[(1 − cos)·e^-..]
        let m = model();
        for xc in [2.0e-7, 7.359_025e-7, 2.0e-6] {
            let sq = HBAR / xc;
            let (a, _) = m.kick_scales(sq);
            let c = std::f64::consts::SQRT_2 * m.params.separation_m / xc;
            let quadrature = {
                let (xs, ws) = quad::gauss_hermite(128);
                let ct = c / (1.0 + a[0]).sqrt();
                let sxy = (-0.5 * (a[0].ln_1p() + a[1].ln_1p())).exp();
                let mean_cos: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(&v, &w)| w * (ct * v).cos())
                    .sum::<f64>()
                    / std::f64::consts::PI.sqrt();
                2.0 * (sxy - sxy * mean_cos)
            };
            let closed = m.phase_flip_coeff(sq);
            assert!(
                (closed / quadrature - 1.0).abs() < 1e-9,
                "mismatch at xc = {xc}: {closed} vs {quadrature}"
            );
        }
    }

    #[test]
    fn collective_rate_matches_closed_dual() {
        let m = model();
        let tau = 1.0e8;
        for xc in [4.0e-7, 7.359_025e-7, 3.0e-6] {
            let sq = HBAR / xc;
            let params = ModificationParams::new(tau, sq, 0.0).unwrap();
            let rates = m.rates_double_well(&params).unwrap();
            let (a, arg) = m.kick_scales(sq);
            let closed = 1.0
                - (-arg).exp()
                    * (-0.5 * (a[0].ln_1p() + a[1].ln_1p() + a[2].ln_1p())).exp();
            let expected = mass_ratio_sq(M_RB87) / tau * closed;
            assert!(
                (rates.gamma_c / expected - 1.0).abs() < 1e-7,
                "xc = {xc}: {} vs {expected}",
                rates.gamma_c
            );
        }
    }

    #[test]
    fn single_well_rate_matches_closed_dual() {
        let m = model();
        let tau = 1.0e8;
        for xc in [4.0e-7, 7.359_025e-7, 3.0e-6] {
            let sq = HBAR / xc;
            let params = ModificationParams::new(tau, sq, 0.0).unwrap();
            let rates = m.rates_single_well(&params).unwrap();
            let (a, _) = m.kick_scales(sq);
            let closed = 2.0 * a[2]
                * (-1.5 * a[2].ln_1p()).exp()
                * (-0.5 * (a[0].ln_1p() + a[1].ln_1p())).exp();
            let expected = mass_ratio_sq(M_RB87) / tau * closed;
            assert!(
                (rates.gamma_s / expected - 1.0).abs() < 1e-7,
                "xc = {xc}: {} vs {expected}",
                rates.gamma_s
            );
        }
    }

    #[test]
    fn quantum_limit_rates_are_exactly_zero() {
        let m = model();
        let params = ModificationParams::quantum_limit(sigma_star()).unwrap();
        let r = m.rates_double_well(&params).unwrap();
        assert_eq!(
            (r.gamma_p, r.gamma_s, r.gamma_l, r.gamma_c),
            (0.0, 0.0, 0.0, 0.0)
        );
        let r = m.rates_single_well(&params).unwrap();
        assert_eq!(r.gamma_s, 0.0);
    }

    #[test]
    fn rates_never_read_the_prepared_variances() {
        let mut p = BecParams::default();
        p.jz_var0 = 120.0;
        p.jy_var0 = 800.0;
        let altered = BecModel::new(p).unwrap();
        let params = ModificationParams::new(3.0e7, sigma_star(), 0.0).unwrap();
        let a = model().rates_double_well(&params).unwrap();
        let b = altered.rates_double_well(&params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn contrast_is_non_increasing_in_time_and_in_inverse_tau() {
        let m = model();
        let sq = sigma_star();
        let fast = m
            .rates_double_well(&ModificationParams::new(1.0e7, sq, 0.0).unwrap())
            .unwrap();
        let slow = m
            .rates_double_well(&ModificationParams::new(1.0e9, sq, 0.0).unwrap())
            .unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..=20 {
            let t = 1.0e-3 * f64::from(k);
            let g = m.g_factor_double_well(&fast, t);
            assert!(g <= prev + 1e-15);
            assert!(g <= m.g_factor_double_well(&slow, t) + 1e-15);
            prev = g;
        }
    }

    #[test]
    fn component_density_normalizes_on_its_support() {
        let m = model();
        let j = 600.0;
        for (nome, t) in [(0.997, 3.0e-3), (0.5, 7.0e-3), (0.0, 1.0e-2)] {
            // ∫p_J dm over (−J, J) via the angle substitution m = J sin φ,
            // which removes the edge singularities exactly.
            let f = |phi: f64| {
                m.imbalance_density(j * phi.sin(), j, nome, t).unwrap() * j * phi.cos()
            };
            let total = quad::integrate(
                &f,
                -std::f64::consts::FRAC_PI_2,
                std::f64::consts::FRAC_PI_2,
                1e-9,
            )
            .unwrap();
            assert!(
                (total - 1.0).abs() < 1e-3,
                "nome {nome}: integral {total}"
            );
        }
    }

    #[test]
    fn zero_contrast_density_is_the_arcsine_law() {
        let m = model();
        let j = 600.0;
        for mm in [-450.0, 0.0, 123.4, 599.0] {
            let p = m.imbalance_density(mm, j, 0.0, 5.0e-3).unwrap();
            let arcsine = 1.0 / (std::f64::consts::PI * (j * j - mm * mm).sqrt());
            assert!((p / arcsine - 1.0).abs() < 1e-12);
        }
        assert_eq!(m.imbalance_density(600.0, j, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(m.imbalance_density(-731.0, j, 0.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn survival_window_collapses_without_loss() {
        let m = model();
        let (active, log_marginal) = m.survival_window(0.0, 1.0e-2);
        assert_eq!(active, vec![(600.0, 1.0)]);
        assert_eq!(log_marginal, 0.0);
    }

    #[test]
    fn survival_window_matches_recurrence_built_binomial() {
        let m = model();
        let (gamma_l, t) = (8.0, 2.5e-3); // x = 0.02, p ≈ 0.980
        let (active, log_marginal) = m.survival_window(gamma_l, t);
        // Independent route: log-space pmf recurrence downward from J₀.
        let x: f64 = gamma_l * t;
        let lp = -x;
        let lq = (-(-x).exp_m1()).ln();
        let n = 600_u32;
        let mut lw = vec![f64::NEG_INFINITY; n as usize + 1];
        lw[n as usize] = f64::from(n) * lp;
        for j in (540..n).rev() {
            let jf = f64::from(j);
            lw[j as usize] = lw[j as usize + 1]
                + ((jf + 1.0) / (f64::from(n) - jf)).ln()
                + lq
                - lp;
        }
        let max = lw[540..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = lw[540..].iter().map(|&v| (v - max).exp()).sum();
        let log_ref = max + total.ln();
        assert!((log_marginal - log_ref).abs() < 1e-9);
        for &(j, w) in &active {
            let expect = (lw[j as usize] - log_ref).exp();
            assert!((w - expect).abs() < 1e-12, "J = {j}: {w} vs {expect}");
        }
        let mass: f64 = active.iter().map(|&(_, w)| w).sum();
        assert!((mass - 1.0).abs() < 1e-11);
    }

    #[test]
    fn joint_equals_brute_force_sum_at_small_spin() {
        let mut p = BecParams::default();
        p.n_atoms = 60; // J₀ = 30, window J ≥ 27
        p.jz_var0 = 0.41 * 0.41 * 15.0;
        p.jy_var0 = 225.0 / p.jz_var0; // saturate J₀²/4 at J₀ = 30
        let m = BecModel::new(p).unwrap();
        let params = ModificationParams::new(2.0e6, sigma_star(), 0.0).unwrap();
        let (t, outcome) = (4.0e-3, 11.3);
        let (gamma_p, gamma_l) = m.dephasing_rates(&params);
        let rates = BecRates {
            gamma_p,
            gamma_s: 0.0,
            gamma_l,
            gamma_c: 0.0,
        };
        let g = m.g_factor_double_well(&rates, t);
        let x = gamma_l * t;
        assert!(x > 0.05, "want a spread window, got x = {x}");
        let psurv = (-x).exp();
        let mut joint = 0.0;
        for j in 27..=30_u32 {
            let weight = (log_binomial(30, u64::from(j)).unwrap()
                + f64::from(j) * psurv.ln()
                + f64::from(30 - j) * (1.0 - psurv).ln())
            .exp();
            joint +=
                weight * m.imbalance_density(outcome, f64::from(j), g, t).unwrap();
        }
        let log_joint = m.log_joint_with_heating(&outcome, &t, &params).unwrap();
        assert!(
            (log_joint - joint.ln()).abs() < 1e-9,
            "{log_joint} vs {}",
            joint.ln()
        );
        let cond = m.log_likelihood(&outcome, &t, &params).unwrap();
        let marg = m.log_heating_marginal(&t, &params).unwrap();
        assert!((cond - (log_joint - marg)).abs() < 1e-12);
    }

    #[test]
    fn conditioned_density_integrates_to_one() {
        let m = model();
        let params = ModificationParams::new(1.0e8, sigma_star(), 0.0).unwrap();
        for t in [0.0, 6.67e-3, 2.0e-2] {
            let total = m.expectation(&t, &params, &|_| 1.0, 1e-8).unwrap();
            assert!((total - 1.0).abs() < 1e-3, "t = {t}: {total}");
        }
    }

    #[test]
    fn expectation_is_zero_when_the_window_is_unreachable() {
        let m = model();
        // τ_e so small that the survival window underflows at this delay.
        let params = ModificationParams::new(1.0e2, sigma_star(), 0.0).unwrap();
        let t = 2.0e-2;
        assert!(m.log_heating_marginal(&t, &params).unwrap() < LOG_MIN_SURVIVAL);
        assert_eq!(m.expectation(&t, &params, &|_| 1.0, 1e-8).unwrap(), 0.0);
        assert_eq!(
            m.log_likelihood(&0.0, &t, &params).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn moment_damping_laws_match_the_dicke_oracle() {
        // First and second transverse moments under phase flips: the fringe
        // mean damps as e^{−Γ_P t/2} of its free value and the second moment
        // mixes at e^{−2Γ_P t}, for any squeezing, drive, and shear.
        let (eps, zeta, gamma_p, t) = (0.7, 0.01, 0.02, 30.0);
        for target in [10.0, 20.0] {
            let initial = one_axis_squeeze(100, target).unwrap();
            let j = initial.j();
            let free = evolve_dicke(&initial, eps, zeta, 0.0, t).unwrap();
            let damped = evolve_dicke(&initial, eps, zeta, gamma_p, t).unwrap();
            let law_mean = (-0.5 * gamma_p * t).exp() * free.jy_mean();
            assert!(
                (damped.jy_mean() - law_mean).abs() < 1e-9 * j * (j + 1.0),
                "target {target}: ⟨J_y⟩ {} vs {law_mean}",
                damped.jy_mean()
            );
            let sum = free.jx_second_moment() + free.jy_second_moment();
            let diff = free.jx_second_moment() - free.jy_second_moment();
            let law_second = 0.5 * sum - 0.5 * (-2.0 * gamma_p * t).exp() * diff;
            assert!(
                (damped.jy_second_moment() - law_second).abs() < 1e-9 * j * (j + 1.0),
                "target {target}: ⟨J_y²⟩ {} vs {law_second}",
                damped.jy_second_moment()
            );
        }
    }

    #[test]
    fn single_well_moments_saturate_and_match_the_shear_formula() {
        let m = model();
        let rates = BecRates {
            gamma_p: 0.0,
            gamma_s: 0.05,
            gamma_l: 0.0,
            gamma_c: 0.0,
        };
        let jz0 = m.params().jz_var0;
        let j0 = m.params().j0();
        assert!((m.single_well_jz_second_moment(&rates, 0.0) - jz0).abs() < 1e-9);
        let late = m.single_well_jz_second_moment(&rates, 1.0e4);
        assert!((late - (jz0 + j0 * j0) / 3.0).abs() < 1e-6 * j0 * j0);
        // The J_y growth law is the shear-diffusion variance with the
        // collective coupling ζ·J₀ and diffusion Γ_S.
        let t = 0.5;
        let grown = m.single_well_jy_second_moment(&rates, t);
        let reference = shear_variance_formula(
            m.params().shear_rad_per_s * j0,
            rates.gamma_s,
            j0,
            m.params().jy_var0.sqrt(),
            jz0.sqrt(),
            t,
        );
        assert!(
            (grown / reference - 1.0).abs() < 1e-12,
            "{grown} vs {reference}"
        );
        let g = m.g_factor_single_well(&rates, t);
        assert!((g - (-grown / (2.0 * j0 * j0)).exp()).abs() < 1e-15);
    }

    #[test]
    fn simulation_is_reproducible_and_statistically_consistent() {
        let m = model();
        let params = ModificationParams::new(2.4e8, HBAR / 1.0e-7, 0.0).unwrap();
        let delays = [0.0, 1.0e-2, 2.0e-2];
        let a = m.simulate_double_well(&params, &delays, 200, 7).unwrap();
        let b = m.simulate_double_well(&params, &delays, 200, 7).unwrap();
        assert_eq!(a, b);
        let j0 = m.params().j0();
        for run in a.runs() {
            assert!(run.outcome().abs() <= j0);
        }
        // At t = 0 the imbalance is J₀ sin ψ with ψ ~ N(0, jy_var0/J₀²), so
        // its variance is close to jy_var0; check within 3 standard errors.
        let at0: Vec<f64> = a
            .runs()
            .iter()
            .filter(|r| *r.context() == 0.0)
            .map(|r| *r.outcome())
            .collect();
        let n = at0.len() as f64;
        let mean = at0.iter().sum::<f64>() / n;
        let var = at0.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = var * (2.0 / n).sqrt();
        assert!(
            (var - m.params().jy_var0).abs() < 3.0 * se,
            "var {var} vs {}",
            m.params().jy_var0
        );
    }

    #[test]
    fn log_likelihood_is_continuous_across_the_loss_knee() {
        // A dense τ_e sweep around the survival knee must produce finite,
        // monotone-free but continuous values (no NaN, no jumps except the
        // documented cliff at the underflow edge).
        let m = model();
        let sq = sigma_star();
        let (outcome, t) = (250.0, 2.0e-2);
        let mut prev: Option<f64> = None;
        for k in 0..60 {
            let tau = 10f64.powf(7.0 + 2.0 * f64::from(k) / 59.0);
            let params = ModificationParams::new(tau, sq, 0.0).unwrap();
            let ll = m.log_likelihood(&outcome, &t, &params).unwrap();
            assert!(!ll.is_nan());
            if let (Some(p), true) = (prev, ll.is_finite()) {
                if p != f64::NEG_INFINITY {
                    assert!((ll - p).abs() < 0.5, "jump at tau = {tau:e}: {p} -> {ll}");
                }
            }
            prev = Some(ll);
        }
    }
}
