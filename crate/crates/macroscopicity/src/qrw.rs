//! Four-step atomic quantum random walk with postselected readout.
//!
//! A single caesium atom walks on an optical lattice: in each of four steps
//! the two internal states are displaced in opposite directions by one site
//! (taking `t_shift`) and then held for a pulse interval (`t_rest`).  The
//! final site of the walker, read out after the fourth step, lands on one of
//! five lattice sites.  Under the classicalizing modification, spatial
//! coherence between sites separated by `x − x'` decays at a rate set by
//! `σ_q` and `τ_e`; all of its effect on the five-site statistics is carried
//! by a single coherence reduction factor `R(t)` evaluated at two hold times.
//!
//! Three measurement protocols are modeled: the full walk and the two
//! postselected variants conditioned on the first step going left or right.
//! Postselection destroys the first-step coherence, so the walk effectively
//! starts one step later and only `R(t_rest)` survives in the statistics.

use crate::domain::{
    discrete_expectation, Error, ExperimentModel, ModificationParams, OutcomeSpace, Result,
};
use crate::specfun::erf_real;
use crate::units::{mass_ratio_sq, K_B, M_CS133};

/// Lattice and timing parameters of the walk.
#[derive(Debug, Clone, PartialEq)]
pub struct QrwParams {
    /// Lattice displacement time per step `T_d`, seconds.
    pub t_shift_s: f64,
    /// Hold (pulse) time per step `T_r`, seconds.
    pub t_rest_s: f64,
    /// Site spacing `d`, metres.
    pub site_spacing_m: f64,
    /// Walker mass, kg.
    pub atom_mass_kg: f64,
}

impl Default for QrwParams {
    fn default() -> Self {
        Self {
            t_shift_s: 21e-6,
            t_rest_s: 5e-6,
            site_spacing_m: 433e-9,
            atom_mass_kg: M_CS133,
        }
    }
}

impl QrwParams {
    /// Validated constructor: every field must be positive and finite.
    pub fn new(
        t_shift_s: f64,
        t_rest_s: f64,
        site_spacing_m: f64,
        atom_mass_kg: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("t_shift_s", t_shift_s),
            ("t_rest_s", t_rest_s),
            ("site_spacing_m", site_spacing_m),
            ("atom_mass_kg", atom_mass_kg),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "qrw parameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            t_shift_s,
            t_rest_s,
            site_spacing_m,
            atom_mass_kg,
        })
    }
}

/// Which subset of walks a run belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QrwProtocol {
    /// All walks, regardless of the first step.
    Full,
    /// Walks whose first step went left.
    PostselectLeft,
    /// Walks whose first step went right.
    PostselectRight,
}

impl QrwProtocol {
    /// Stable identifier used in data files and reports.
    #[must_use]
    pub fn tag(&self) -> &'static str {
        match self {
            QrwProtocol::Full => "full",
            QrwProtocol::PostselectLeft => "postselect_left",
            QrwProtocol::PostselectRight => "postselect_right",
        }
    }

    /// Parse the identifier produced by [`QrwProtocol::tag`].
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(QrwProtocol::Full),
            "postselect_left" => Ok(QrwProtocol::PostselectLeft),
            "postselect_right" => Ok(QrwProtocol::PostselectRight),
            other => Err(Error::Data(format!(
                "unknown walk protocol {other:?} (expected full, postselect_left \
                 or postselect_right)"
            ))),
        }
    }
}

/// The five final lattice sites, in outcome order.
pub const QRW_SITES: [i8; 5] = [-2, -1, 0, 1, 2];

/// Likelihood model for the four-step walk.
#[derive(Debug, Clone, Default)]
pub struct QrwModel {
    params: QrwParams,
}

/// Deficit `1 − √π·erf(y)/(2y)` of the ramped-displacement decoherence
/// exponent, accurate for all `y ≥ 0`.  For small `y` the closed form
/// cancels catastrophically, so a Taylor series is used below `y = 0.05`
/// (next omitted term < 1e-16 relative there).
fn ramp_deficit(y: f64) -> f64 {
    if y < 0.05 {
        let y2 = y * y;
        y2 * (1.0 / 3.0 - y2 * (0.1 - y2 * (1.0 / 42.0 - y2 / 216.0)))
    } else {
        1.0 - core::f64::consts::PI.sqrt() * erf_real(y) / (2.0 * y)
    }
}

/// Deficit `1 − exp(−x²/2)` of the static-hold decoherence exponent,
/// cancellation-free via `exp_m1`.
fn hold_deficit(x: f64) -> f64 {
    -(-0.5 * x * x).exp_m1()
}

impl QrwModel {
    #[must_use]
    pub fn new(params: QrwParams) -> Self {
        Self { params }
    }

    #[must_use]
    pub fn params(&self) -> &QrwParams {
        &self.params
    }

    /// Coherence reduction factor `R(t_hold)` ∈ [0, 1]: the surviving
    /// fraction of the interference cross-term after one displacement ramp
    /// of duration `t_shift` on each of two sides (hence the factor 2) plus
    /// a static hold of duration `t_hold` at one-site separation.
    ///
    /// ```text
    /// R = exp[ −(2·T_d·m²/τ_e·m_e²)·(1 − √π·ħ·erf(dσ_q/√2ħ)/(√2·dσ_q)) ]
    ///   · exp[ −(t_hold·m²/τ_e·m_e²)·(1 − e^{−d²σ_q²/2ħ²}) ]
    /// ```
    pub fn reduction_factor(&self, t_hold_s: f64, params: &ModificationParams) -> Result<f64> {
        params.require_zero_sigma_s("qrw")?;
        if !(t_hold_s >= 0.0) {
            return Err(Error::Config(format!(
                "hold time must be non-negative, got {t_hold_s}"
            )));
        }
        let x = self.params.site_spacing_m * params.sigma_q() / crate::units::HBAR;
        let rate = mass_ratio_sq(self.params.atom_mass_kg) / params.tau_e();
        let exponent = rate
            * (2.0 * self.params.t_shift_s * ramp_deficit(x / core::f64::consts::SQRT_2)
                + t_hold_s * hold_deficit(x));
        Ok((-exponent).exp())
    }

    /// The two reduction factors entering the site statistics: `R(T_r)` and
    /// `R(T_d + 2T_r)`.
    fn r_pair(&self, params: &ModificationParams) -> Result<(f64, f64)> {
        let r1 = self.reduction_factor(self.params.t_rest_s, params)?;
        let r2 = self.reduction_factor(
            self.params.t_shift_s + 2.0 * self.params.t_rest_s,
            params,
        )?;
        Ok((r1, r2))
    }

    /// Probability vector over the final sites (−2, −1, 0, 1, 2).
    ///
    /// The centre entry absorbs the normalization residue so the five
    /// entries always sum to exactly 1; all entries stay within one
    /// floating-point rounding of their closed forms.
    pub fn site_probabilities(
        &self,
        protocol: QrwProtocol,
        params: &ModificationParams,
    ) -> Result<[f64; 5]> {
        let (r1, r2) = self.r_pair(params)?;
        Ok(match protocol {
            QrwProtocol::Full => {
                let p0 = 1.0 / 16.0;
                let p1 = 0.25 + 0.25 * r1 + 0.125 * r2;
                let p3 = 0.25 - 0.125 * r2;
                let p4 = 1.0 / 16.0;
                let p2 = 1.0 - (p0 + p1 + p3 + p4);
                [p0, p1, p2, p3, p4]
            }
            QrwProtocol::PostselectLeft => Self::left_vector(r1),
            QrwProtocol::PostselectRight => {
                let mut v = Self::left_vector(r1);
                v.reverse();
                v
            }
        })
    }

    fn left_vector(r1: f64) -> [f64; 5] {
        let p0 = 0.125;
        let p1 = 0.375 + 0.25 * r1;
        let p3 = 0.125;
        let p4 = 0.0;
        let p2 = 1.0 - (p0 + p1 + p3 + p4);
        [p0, p1, p2, p3, p4]
    }

    /// Left-hand side of the macrorealist bound in modification form:
    /// `R(T_r) + R(T_d + 2T_r)`.  Macrorealism requires the value to be
    /// ≤ 0, so any positive value witnesses its violation; the value decays
    /// to zero exponentially as `τ_e → 0`.  May underflow to 0 for extreme
    /// `τ_e`; use [`QrwModel::leggett_garg_lhs_ln`] when the sign of the
    /// mathematically positive value must be resolved.
    pub fn leggett_garg_lhs(&self, params: &ModificationParams) -> Result<f64> {
        let (r1, r2) = self.r_pair(params)?;
        Ok(r1 + r2)
    }

    /// Natural log of the macrorealist LHS, finite for every `τ_e > 0`:
    /// both reduction factors share the displacement-ramp exponent, so
    /// `ln(R₁+R₂)` evaluates without underflow even where the linear value
    /// is below the smallest representable number.
    pub fn leggett_garg_lhs_ln(&self, params: &ModificationParams) -> Result<f64> {
        params.require_zero_sigma_s("qrw")?;
        let x = self.params.site_spacing_m * params.sigma_q() / crate::units::HBAR;
        let rate = mass_ratio_sq(self.params.atom_mass_kg) / params.tau_e();
        let ramp = rate * 2.0 * self.params.t_shift_s * ramp_deficit(x / core::f64::consts::SQRT_2);
        let hold_rate = rate * hold_deficit(x);
        let t1 = self.params.t_rest_s;
        let t2 = self.params.t_shift_s + 2.0 * self.params.t_rest_s;
        // ln(e^{-ramp-hold·t1} + e^{-ramp-hold·t2}), factored at the larger term
        Ok(-ramp - hold_rate * t1 + (-hold_rate * (t2 - t1)).exp().ln_1p())
    }

    /// Momentum-diffusion heating estimate for a free atom: energy gain
    /// over `duration` and the corresponding temperature increase
    /// `ΔT = (2/3)·ΔE/k_B`.  The kick model is isotropic Gaussian momentum
    /// diffusion of total variance `σ_q²` per event at the amplified event
    /// rate `(m/m_e)²/τ_e`.  Diagnostic only; the likelihood never uses it.
    pub fn heating_check(
        &self,
        params: &ModificationParams,
        duration_s: f64,
    ) -> Result<(f64, f64)> {
        params.require_zero_sigma_s("qrw")?;
        if !(duration_s >= 0.0) {
            return Err(Error::Config(format!(
                "duration must be non-negative, got {duration_s}"
            )));
        }
        let sq = params.sigma_q();
        let de_dt = sq * sq * mass_ratio_sq(self.params.atom_mass_kg)
            / (2.0 * self.params.atom_mass_kg * params.tau_e());
        let delta_e = de_dt * duration_s;
        let delta_t = 2.0 / 3.0 * delta_e / K_B;
        Ok((delta_e, delta_t))
    }
}

impl ExperimentModel for QrwModel {
    type Outcome = i8;
    type Context = QrwProtocol;

    fn name(&self) -> &str {
        "qrw"
    }

    fn outcome_space(&self, _context: &Self::Context) -> OutcomeSpace<i8> {
        OutcomeSpace::Discrete(QRW_SITES.to_vec())
    }

    fn log_likelihood(
        &self,
        outcome: &i8,
        context: &Self::Context,
        params: &ModificationParams,
    ) -> Result<f64> {
        let site = *outcome;
        if !(-2..=2).contains(&site) {
            return Err(Error::Data(format!(
                "walk site {site} outside the five-site window [-2, 2]"
            )));
        }
        let p = self.site_probabilities(*context, params)?[(site + 2) as usize];
        Ok(p.ln())
    }

    fn expectation(
        &self,
        context: &Self::Context,
        params: &ModificationParams,
        g: &dyn Fn(&i8) -> f64,
        _abs_tol: f64,
    ) -> Result<f64> {
        discrete_expectation(self, context, params, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{dataset_log_likelihood, Dataset, Run};

    fn model() -> QrwModel {
        QrwModel::default()
    }

    fn params(tau: f64, hbar_over_sigma_m: f64) -> ModificationParams {
        ModificationParams::new(tau, crate::units::HBAR / hbar_over_sigma_m, 0.0).unwrap()
    }

    #[test]
    fn quantum_limit_reproduces_coherent_walk_exactly() {
        let m = model();
        let p = ModificationParams::quantum_limit(crate::units::HBAR / 43.3e-9).unwrap();
        let probs = m.site_probabilities(QrwProtocol::Full, &p).unwrap();
        assert_eq!(probs, [1.0 / 16.0, 5.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0, 1.0 / 16.0]);
    }

    #[test]
    fn dephased_limit_reproduces_classical_binomial_walk_exactly() {
        let m = model();
        // τ_e so small that both reduction factors underflow to exactly 0.
        let p = params(1e-12, 43.3e-9);
        let (r1, r2) = m.r_pair(&p).unwrap();
        assert_eq!((r1, r2), (0.0, 0.0));
        let probs = m.site_probabilities(QrwProtocol::Full, &p).unwrap();
        assert_eq!(probs, [1.0 / 16.0, 1.0 / 4.0, 3.0 / 8.0, 1.0 / 4.0, 1.0 / 16.0]);
    }

    #[test]
    fn probability_vectors_are_normalized_and_non_negative_on_grid() {
        let m = model();
        for i in 0..50 {
            let tau = 10f64.powf(2.0 + 12.0 * (i as f64) / 49.0);
            for j in 0..50 {
                let x = 10f64.powf(-12.0 + 8.0 * (j as f64) / 49.0);
                let p = params(tau, x);
                for proto in [
                    QrwProtocol::Full,
                    QrwProtocol::PostselectLeft,
                    QrwProtocol::PostselectRight,
                ] {
                    let v = m.site_probabilities(proto, &p).unwrap();
                    // closure: the centre entry balances the other four
                    // exactly (their sum is ≥ 1/2, so 1 − sum is exact)
                    let closed = ((v[0] + v[1]) + v[3]) + v[4] + v[2];
                    assert_eq!(closed, 1.0, "{proto:?} τ={tau:e} ħ/σ={x:e}");
                    let sum: f64 = v.iter().sum();
                    assert!(
                        (sum - 1.0).abs() < 1e-15,
                        "{proto:?} τ={tau:e} ħ/σ={x:e}: sum={sum}"
                    );
                    assert!(v.iter().all(|&q| q >= 0.0), "{v:?}");
                }
            }
        }
    }

    #[test]
    fn postselected_vectors_mirror_each_other() {
        let m = model();
        let p = params(3.7e-4, 1e-7);
        let l = m.site_probabilities(QrwProtocol::PostselectLeft, &p).unwrap();
        let r = m.site_probabilities(QrwProtocol::PostselectRight, &p).unwrap();
        for k in 0..5 {
            assert_eq!(l[k], r[4 - k]);
        }
        // Site +2 is unreachable when the first step went left.
        assert_eq!(l[4], 0.0);
        let ll = m
            .log_likelihood(&2, &QrwProtocol::PostselectLeft, &p)
            .unwrap();
        assert_eq!(ll, f64::NEG_INFINITY);
    }

    #[test]
    fn reduction_factor_monotonicities() {
        let m = model();
        let r = |tau: f64, x: f64, t: f64| {
            m.reduction_factor(t, &params(tau, x)).unwrap()
        };
        // The (m_Cs/m_e)² ≈ 5.9e10 amplification puts the interesting τ_e
        // range near 1e6 s for microsecond walks.
        let t_r = m.params().t_rest_s;
        // increasing in τ_e
        assert!(r(1e7, 1e-8, t_r) > r(1e6, 1e-8, t_r));
        // decreasing in σ_q (i.e. increasing in ħ/σ_q)
        assert!(r(1e6, 1e-7, t_r) > r(1e6, 1e-8, t_r));
        // decreasing in hold time
        assert!(r(1e6, 1e-8, t_r) > r(1e6, 1e-8, 10.0 * t_r));
        // bounded
        for &v in &[r(1e-6, 1e-9, t_r), r(1e9, 1e-6, t_r)] {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn ramp_deficit_series_matches_closed_form_at_crossover() {
        for &y in &[0.049, 0.05, 0.051] {
            let series = {
                let y2: f64 = y * y;
                y2 * (1.0 / 3.0 - y2 * (0.1 - y2 * (1.0 / 42.0 - y2 / 216.0)))
            };
            let closed = 1.0 - core::f64::consts::PI.sqrt() * erf_real(y) / (2.0 * y);
            assert!(
                (series - closed).abs() < 1e-15,
                "y={y}: series={series:e} closed={closed:e}"
            );
        }
    }

    #[test]
    fn macrorealist_lhs_is_positive_and_vanishes_with_tau() {
        let m = model();
        let mut last = f64::INFINITY;
        for &tau in &[1e9, 1e8, 1e7, 1e6, 1e5, 1e4] {
            let v = m.leggett_garg_lhs(&params(tau, 43.3e-9)).unwrap();
            assert!(v > 0.0, "τ={tau:e} gave {v}");
            assert!(v < last, "not decreasing at τ={tau:e}");
            last = v;
        }
        // exponential decay: already negligible at τ = 100 s
        let tiny = m.leggett_garg_lhs(&params(100.0, 43.3e-9)).unwrap();
        assert!(tiny < 1e-100);
    }

    #[test]
    fn log_space_lhs_stays_finite_and_decreasing_where_linear_underflows() {
        let m = model();
        let mut last = f64::NEG_INFINITY;
        for i in 0..27 {
            let tau = 10f64.powf(-12.0 + f64::from(i));
            let p = params(tau, 43.3e-9);
            let ln_v = m.leggett_garg_lhs_ln(&p).unwrap();
            assert!(ln_v.is_finite(), "τ={tau:e} gave ln = {ln_v}");
            assert!(ln_v > last, "not increasing at τ={tau:e}");
            last = ln_v;
            // where the linear value is representable the two agree
            let v = m.leggett_garg_lhs(&p).unwrap();
            if v > 1e-280 {
                assert!((ln_v - v.ln()).abs() < 1e-9 * ln_v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn macrorealist_lhs_matches_signed_site_sum() {
        // Σ_ℓ sgn(ℓ)·(P(ℓ) − ½[P_L(ℓ) + P_R(ℓ)]) = −(R₁ + R₂)/4: the raw
        // signed sum carries a factor −1/4 relative to the reduced form.
        let m = model();
        for &(tau, x) in &[(1e-4, 4.33e-8), (3e-5, 1e-7), (1e-3, 1e-9)] {
            let p = params(tau, x);
            let full = m.site_probabilities(QrwProtocol::Full, &p).unwrap();
            let left = m.site_probabilities(QrwProtocol::PostselectLeft, &p).unwrap();
            let right = m.site_probabilities(QrwProtocol::PostselectRight, &p).unwrap();
            let mut raw = 0.0;
            for (k, site) in QRW_SITES.iter().enumerate() {
                let sgn = f64::from(site.signum());
                raw += sgn * (full[k] - 0.5 * (left[k] + right[k]));
            }
            let lhs = m.leggett_garg_lhs(&p).unwrap();
            assert!(
                (raw - (-0.25 * lhs)).abs() < 1e-12,
                "τ={tau:e}: raw={raw:e} lhs={lhs:e}"
            );
        }
    }

    #[test]
    fn heating_vanishes_in_quantum_limit_and_scales_linearly() {
        let m = model();
        let quantum = ModificationParams::quantum_limit(crate::units::HBAR / 4.33e-8).unwrap();
        let (de, dt) = m.heating_check(&quantum, 104e-6).unwrap();
        assert_eq!((de, dt), (0.0, 0.0));

        let p1 = params(1e-3, 4.33e-8);
        let p2 = params(2e-3, 4.33e-8);
        let (e1, _) = m.heating_check(&p1, 104e-6).unwrap();
        let (e2, _) = m.heating_check(&p2, 104e-6).unwrap();
        assert!((e1 / e2 - 2.0).abs() < 1e-12, "1/τ_e scaling violated");
        let (e3, _) = m.heating_check(&p1, 208e-6).unwrap();
        assert!((e3 / e1 - 2.0).abs() < 1e-12, "duration scaling violated");
    }

    #[test]
    fn heating_magnitude_matches_reported_scale() {
        // ħ/σ_q = d/10 and the reduced time scale τ_e·m_e²/m² = 16.75 μs
        // over the four-step duration 4·(T_d + T_r): the published estimate
        // is ΔT ≈ 5.6 μK, matched here within a factor of 2 (the kick model
        // behind the published number is not spelled out).
        let m = model();
        let d = m.params().site_spacing_m;
        let tau_bare = 16.75e-6 * mass_ratio_sq(M_CS133);
        let p = params(tau_bare, d / 10.0);
        let duration = 4.0 * (m.params().t_shift_s + m.params().t_rest_s);
        let (_, dt) = m.heating_check(&p, duration).unwrap();
        assert!(
            dt > 5.6e-6 / 2.0 && dt < 5.6e-6 * 2.0,
            "ΔT = {dt:e} K not within a factor 2 of 5.6 μK"
        );
    }

    #[test]
    fn dataset_log_likelihood_of_pure_site_counts() {
        // 627 walks all at site −2 under the full protocol: each contributes
        // log(1/16) regardless of parameters.
        let m = model();
        let data = Dataset::new(
            "qrw",
            vec![Run::with_weight(-2i8, QrwProtocol::Full, 627).unwrap()],
        );
        let p = params(1e-4, 4.33e-8);
        let ll = dataset_log_likelihood(&m, &data, &p).unwrap();
        assert!((ll - 627.0 * (1.0f64 / 16.0).ln()).abs() < 1e-9);
    }

    #[test]
    fn intermediate_tau_morphs_monotonically_between_limits() {
        // Total variation to the coherent vector grows as τ_e shrinks.
        let m = model();
        let quantum = [1.0 / 16.0, 5.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0, 1.0 / 16.0];
        let mut last_tv = -1.0;
        for &tau in &[1e-2, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5] {
            let v = m
                .site_probabilities(QrwProtocol::Full, &params(tau, 4.33e-8))
                .unwrap();
            let tv: f64 = v
                .iter()
                .zip(quantum.iter())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv >= last_tv, "τ={tau:e}: tv={tv} < {last_tv}");
            last_tv = tv;
        }
    }
}
