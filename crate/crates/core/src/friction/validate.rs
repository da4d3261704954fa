//! Randomized witness search for the structural assumptions on a law.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{asinh_nonneg, AgeingLaw, FrictionError, FrictionLaw, FrictionVariant, RateStateParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub samples: usize,
    pub seed: u64,
    /// Largest sampled slip rate; rates are drawn from `[0, max_rate]`.
    pub max_rate: f64,
    /// Sampled states lie in `[-alpha_bound, alpha_bound]`.
    pub alpha_bound: f64,
    /// Relative slack tolerated before a deviation counts as a violation.
    pub slack: f64,
}

impl SamplingConfig {
    pub fn for_params(params: &RateStateParams, samples: usize, seed: u64) -> Self {
        Self { samples, seed, max_rate: 1e3 * params.r_star, alpha_bound: 20.0, slack: 1e-12 }
    }
}

/// Sampled point at which a check attained its largest deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub r: f64,
    pub alpha: f64,
    pub other: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub assumption_id: String,
    /// Largest relative deviation in the wrong direction; zero when the
    /// inequality held everywhere.
    pub max_violation: f64,
    pub witness: Option<Witness>,
    pub passed: bool,
    #[serde(skip)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub samples: usize,
    pub slack: f64,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn max_violation(&self) -> f64 {
        self.checks.iter().map(|c| c.max_violation).fold(0.0, f64::max)
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} samples, relative slack {:e}", self.samples, self.slack)?;
        for check in &self.checks {
            let status = if check.passed { "ok" } else { "VIOLATED" };
            write!(f, "  {:<28} {:<8} max violation {:e}", check.assumption_id, status, check.max_violation)?;
            if let (false, Some(w)) = (check.passed, check.witness) {
                write!(f, " at r={:e} alpha={} other={}", w.r, w.alpha, w.other)?;
            }
            if let Some(err) = &check.error {
                write!(f, " ({err})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Tracker {
    id: &'static str,
    slack: f64,
    worst: f64,
    witness: Option<Witness>,
    error: Option<String>,
}

impl Tracker {
    fn new(id: &'static str, slack: f64) -> Self {
        Self { id, slack, worst: 0.0, witness: None, error: None }
    }

    /// Records `lhs ≤ rhs`, measured relative to the magnitudes involved.
    fn leq(&mut self, lhs: f64, rhs: f64, scale: f64, witness: Witness) {
        let scale = scale.max(lhs.abs()).max(rhs.abs());
        let excess = lhs - rhs;
        let violation = if excess <= 0.0 {
            0.0
        } else if scale > 0.0 {
            excess / scale
        } else {
            f64::INFINITY
        };
        if violation.is_nan() || violation > self.worst || (self.witness.is_none() && violation > 0.0) {
            self.worst = if violation.is_nan() { f64::INFINITY } else { violation };
            self.witness = Some(witness);
        }
    }

    fn absolute(&mut self, violation: f64, witness: Witness) {
        if violation > self.worst {
            self.worst = violation;
            self.witness = Some(witness);
        }
    }

    fn fail(&mut self, err: FrictionError, witness: Witness) {
        if self.error.is_none() {
            self.error = Some(err.to_string());
            self.worst = f64::INFINITY;
            self.witness = Some(witness);
        }
    }

    fn finish(self) -> AssumptionCheck {
        AssumptionCheck {
            assumption_id: self.id.to_string(),
            max_violation: self.worst,
            witness: self.witness,
            passed: self.error.is_none() && self.worst <= self.slack,
            error: self.error,
        }
    }
}

fn sample_rate(rng: &mut ChaCha8Rng, max_rate: f64) -> f64 {
    match rng.random_range(0..10) {
        0 => 0.0,
        1..=4 => rng.random_range(0.0..=max_rate),
        // log-uniform over 30 decades below max_rate
        _ => max_rate * 10f64.powf(-rng.random_range(0.0..30.0)),
    }
}

/// Searches for witnesses against Assumptions 1–5 of an abstract law:
/// nonnegativity and monotonicity of `μ` in `r`, the state Lipschitz bound
/// with the declared `L_μ`, the declared growth bound, monotonicity of `A`
/// and the Lipschitz bound of `f`.
pub fn check_law(law: &dyn FrictionLaw, cfg: &SamplingConfig) -> AssumptionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut nonneg = Tracker::new("mu_nonnegative", cfg.slack);
    let mut monotone = Tracker::new("mu_monotone_in_rate", cfg.slack);
    let mut lipschitz = Tracker::new("mu_lipschitz_in_state", cfg.slack);
    let mut growth = Tracker::new("mu_growth_bound", cfg.slack);
    let mut decay = Tracker::new("state_decay_monotone", cfg.slack);
    let mut source = Tracker::new("state_source_lipschitz", cfg.slack);
    let l_mu = law.lipschitz_mu();
    let l_f = law.lipschitz_f();

    for _ in 0..cfg.samples {
        let r1 = sample_rate(&mut rng, cfg.max_rate);
        let r2 = sample_rate(&mut rng, cfg.max_rate);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let alpha = rng.random_range(-cfg.alpha_bound..=cfg.alpha_bound);
        let beta = rng.random_range(-cfg.alpha_bound..=cfg.alpha_bound);
        let w = Witness { r: lo, alpha, other: hi };

        match (law.mu(lo, alpha), law.mu(hi, alpha), law.mu(lo, beta)) {
            (Ok(m_lo), Ok(m_hi), Ok(m_beta)) => {
                nonneg.absolute(-m_lo.min(m_hi).min(m_beta).min(0.0), w);
                monotone.leq(m_lo, m_hi, 0.0, w);
                let bound = l_mu * (alpha - beta).abs();
                lipschitz.leq((m_lo - m_beta).abs(), bound, m_lo.abs().max(m_beta.abs()), Witness { r: lo, alpha, other: beta });
                if let Some(g) = law.growth_bound(hi, alpha) {
                    growth.leq(m_hi, g, 0.0, Witness { r: hi, alpha, other: 0.0 });
                }
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                nonneg.fail(e, w);
            }
        }

        let (a_lo, a_hi) = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
        match (law.state_decay(a_lo), law.state_decay(a_hi)) {
            (Ok(x), Ok(y)) => decay.leq(x, y, 0.0, Witness { r: 0.0, alpha: a_lo, other: a_hi }),
            (Err(e), _) | (_, Err(e)) => decay.fail(e, Witness { r: 0.0, alpha: a_lo, other: a_hi }),
        }
        match (law.state_source(lo), law.state_source(hi)) {
            (Ok(x), Ok(y)) => source.leq((x - y).abs(), l_f * (hi - lo), x.abs().max(y.abs()), w),
            (Err(e), _) | (_, Err(e)) => source.fail(e, w),
        }
    }

    AssumptionReport {
        samples: cfg.samples,
        slack: cfg.slack,
        checks: vec![
            nonneg.finish(),
            monotone.finish(),
            lipschitz.finish(),
            growth.finish(),
            decay.finish(),
            source.finish(),
        ],
    }
}

/// Assumption suite for the ageing law in the given variant, including the
/// comparison `μ_r ≤ a log 2 + μ_t` for the regularized law.
pub fn validate_assumptions(
    variant: FrictionVariant,
    params: &RateStateParams,
    sample_count: usize,
    rng_seed: u64,
) -> Result<AssumptionReport, FrictionError> {
    params.validate()?;
    let cfg = SamplingConfig::for_params(params, sample_count.max(1), rng_seed);
    validate_with(variant, params, &cfg)
}

pub(crate) fn validate_with(
    variant: FrictionVariant,
    params: &RateStateParams,
    cfg: &SamplingConfig,
) -> Result<AssumptionReport, FrictionError> {
    let law = AgeingLaw::new(variant, *params)?;
    let mut report = check_law(&law, cfg);
    if variant == FrictionVariant::Regularized {
        let truncated = AgeingLaw::new(FrictionVariant::Truncated, *params)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut cmp = Tracker::new("regularized_below_truncated", cfg.slack);
        for _ in 0..cfg.samples {
            let r = sample_rate(&mut rng, cfg.max_rate);
            let alpha = rng.random_range(-cfg.alpha_bound..=cfg.alpha_bound);
            let w = Witness { r, alpha, other: 0.0 };
            match (law.mu(r, alpha), truncated.mu(r, alpha)) {
                (Ok(m_r), Ok(m_t)) => cmp.leq(m_r, params.a * std::f64::consts::LN_2 + m_t, 0.0, w),
                (Err(e), _) | (_, Err(e)) => cmp.fail(e, w),
            }
        }
        report.checks.push(cmp.finish());
    }
    Ok(report)
}

/// Worst relative violation of `|asinh x − asinh y| ≤ |log x − log y|` over
/// `samples` random positive pairs spanning `decades` decades.
pub fn asinh_log_inequality(samples: usize, decades: f64, seed: u64) -> (f64, Option<(f64, f64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0;
    let mut witness = None;
    let half = 0.5 * decades;
    for _ in 0..samples {
        let x = 10f64.powf(rng.random_range(-half..=half));
        let y = 10f64.powf(rng.random_range(-half..=half));
        let lhs = (asinh_nonneg(x) - asinh_nonneg(y)).abs();
        let rhs = (x.ln() - y.ln()).abs();
        let scale = asinh_nonneg(x).max(asinh_nonneg(y)).max(x.ln().abs()).max(y.ln().abs());
        let violation = if lhs > rhs { (lhs - rhs) / scale } else { 0.0 };
        if violation > worst {
            worst = violation;
            witness = Some((x, y));
        }
    }
    (worst, witness)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo() -> RateStateParams {
        RateStateParams::new(0.01, 0.015, 0.6, 1e-6, 1e-2).unwrap()
    }

    #[test]
    fn ageing_variants_have_no_violations() {
        for variant in [FrictionVariant::Truncated, FrictionVariant::Regularized] {
            let report = validate_assumptions(variant, &geo(), 10_000, 7).unwrap();
            assert!(report.passed(), "{report}");
        }
    }

    #[test]
    fn adversarial_law_is_caught() {
        struct Negative;
        impl FrictionLaw for Negative {
            fn mu(&self, _: f64, _: f64) -> Result<f64, FrictionError> {
                Ok(-1.0)
            }
            fn state_decay(&self, _: f64) -> Result<f64, FrictionError> {
                Ok(0.0)
            }
            fn state_source(&self, _: f64) -> Result<f64, FrictionError> {
                Ok(0.0)
            }
            fn lipschitz_mu(&self) -> f64 {
                0.0
            }
            fn lipschitz_f(&self) -> f64 {
                0.0
            }
        }
        let cfg = SamplingConfig::for_params(&geo(), 100, 1);
        let report = check_law(&Negative, &cfg);
        let failures: Vec<_> = report.failures().map(|c| c.assumption_id.as_str()).collect();
        assert_eq!(failures, vec!["mu_nonnegative"]);
        assert_eq!(report.checks[0].max_violation, 1.0);
        assert!(report.checks[0].witness.is_some());
    }

    #[test]
    fn decreasing_decay_is_caught() {
        struct Antitone;
        impl FrictionLaw for Antitone {
            fn mu(&self, r: f64, _: f64) -> Result<f64, FrictionError> {
                Ok(r)
            }
            fn state_decay(&self, alpha: f64) -> Result<f64, FrictionError> {
                Ok(-alpha)
            }
            fn state_source(&self, r: f64) -> Result<f64, FrictionError> {
                Ok(2.0 * r)
            }
            fn lipschitz_mu(&self) -> f64 {
                0.0
            }
            fn lipschitz_f(&self) -> f64 {
                1.0
            }
        }
        let cfg = SamplingConfig::for_params(&geo(), 200, 3);
        let report = check_law(&Antitone, &cfg);
        let failures: Vec<_> = report.failures().map(|c| c.assumption_id.clone()).collect();
        assert_eq!(failures, vec!["state_decay_monotone", "state_source_lipschitz"]);
    }

    #[test]
    fn asinh_inequality_has_no_violations() {
        let (worst, _) = asinh_log_inequality(10_000, 12.0, 11);
        assert!(worst <= 1e-12, "worst {worst}");
    }

    #[test]
    fn report_serializes_expected_keys() {
        let report = validate_assumptions(FrictionVariant::Truncated, &geo(), 10, 0).unwrap();
        let json = serde_json::to_value(&report.checks[0]).unwrap();
        for key in ["assumption_id", "max_violation", "witness"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }
}
