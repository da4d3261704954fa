//! Rate-and-state friction laws.
//!
//! A law is described by three functions: the friction coefficient
//! `μ(r, α)` as a function of slip rate `r ≥ 0` and state `α`, and the pair
//! `(A, f)` driving the state evolution `α̇ + A(α) = f(r)`. The
//! [`FrictionLaw`] trait is the plug-in point; [`AgeingLaw`] provides the
//! regularized and truncated variants of the ageing (slowness) law.

mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use validate::{
    asinh_log_inequality, check_law, validate_assumptions, AssumptionCheck, AssumptionReport,
    SamplingConfig, Witness,
};

/// Largest admissible magnitude of an argument to `exp`.
pub const EXP_LIMIT: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrictionError {
    #[error("{context}: exponent {exponent} outside the representable range (|x| > {EXP_LIMIT})")]
    Range { context: &'static str, exponent: f64 },
    #[error("slip rate must be nonnegative and finite, got {0}")]
    NegativeRate(f64),
    #[error("invalid friction parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

fn guarded_exp(context: &'static str, exponent: f64) -> Result<f64, FrictionError> {
    if exponent.is_nan() || exponent.abs() > EXP_LIMIT {
        return Err(FrictionError::Range { context, exponent });
    }
    Ok(exponent.exp())
}

fn check_rate(r: f64) -> Result<(), FrictionError> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(FrictionError::NegativeRate(r));
    }
    Ok(())
}

/// Parameters of the ageing law `μ = μ* + a log(r/r*) + bα`,
/// `α̇ = (r* e^{-α} − r)/L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateStateParams {
    /// Direct-effect coefficient.
    pub a: f64,
    /// State-effect coefficient.
    pub b: f64,
    /// Reference friction coefficient.
    pub mu_star: f64,
    /// Reference slip rate (m/s).
    pub r_star: f64,
    /// Characteristic slip distance (m).
    pub l_dc: f64,
}

impl RateStateParams {
    pub fn new(a: f64, b: f64, mu_star: f64, r_star: f64, l_dc: f64) -> Result<Self, FrictionError> {
        let params = Self { a, b, mu_star, r_star, l_dc };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), FrictionError> {
        let positive = [("a", self.a), ("r_star", self.r_star), ("l_dc", self.l_dc)];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(FrictionError::InvalidParameter { name, reason: format!("must be > 0, got {value}") });
            }
        }
        for (name, value) in [("b", self.b), ("mu_star", self.mu_star)] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(FrictionError::InvalidParameter { name, reason: format!("must be >= 0, got {value}") });
            }
        }
        Ok(())
    }

    /// `(μ* + bα)/a`, the decay exponent of `r_min`, range-checked.
    fn r_min_exponent(&self, alpha: f64) -> Result<f64, FrictionError> {
        let exponent = (self.mu_star + self.b * alpha) / self.a;
        if exponent.is_nan() || exponent.abs() > EXP_LIMIT {
            return Err(FrictionError::Range { context: "r_min", exponent: -exponent });
        }
        Ok(exponent)
    }

    /// `log(r / r_min(α))` for `r > 0`, evaluated without forming `r_min`.
    fn log_rate_ratio(&self, r: f64, alpha: f64) -> Result<f64, FrictionError> {
        Ok((r / self.r_star).ln() + self.r_min_exponent(alpha)?)
    }
}

/// Which nonnegative modification of the logarithmic law is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrictionVariant {
    /// `a asinh(r / (2 r_min(α)))`.
    Regularized,
    /// `a log⁺(r / r_min(α))`.
    Truncated,
}

/// Prescribed normal stress magnitude and cohesion on the frictional boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionContext {
    /// `|σ̄_n|` (Pa).
    pub sigma_n_bar: f64,
    /// Cohesion `C` (Pa).
    pub cohesion: f64,
}

impl FrictionContext {
    pub fn new(sigma_n_bar: f64, cohesion: f64) -> Result<Self, FrictionError> {
        let ctx = Self { sigma_n_bar, cohesion };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<(), FrictionError> {
        for (name, value) in [("sigma_n_bar", self.sigma_n_bar), ("cohesion", self.cohesion)] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(FrictionError::InvalidParameter { name, reason: format!("must be finite and >= 0, got {value}") });
            }
        }
        Ok(())
    }
}

/// Abstract rate-and-state friction: the coefficient `μ`, its boundary
/// energy density, and the state evolution pair `(A, f)`.
pub trait FrictionLaw: Send + Sync {
    /// Friction coefficient `μ(r, α)`.
    fn mu(&self, rate: f64, alpha: f64) -> Result<f64, FrictionError>;

    /// `A(α)` in `α̇ + A(α) = f(r)`.
    fn state_decay(&self, alpha: f64) -> Result<f64, FrictionError>;

    /// `f(r)` in `α̇ + A(α) = f(r)`.
    fn state_source(&self, rate: f64) -> Result<f64, FrictionError>;

    /// Lipschitz constant of `μ` in its second argument.
    fn lipschitz_mu(&self) -> f64;

    /// Lipschitz constant of `f`.
    fn lipschitz_f(&self) -> f64;

    /// Explicit upper bound of the form `C_μ(1 + r + |α|)` on `μ(r, α)`, if the
    /// law declares one.
    fn growth_bound(&self, _rate: f64, _alpha: f64) -> Option<f64> {
        None
    }

    /// Traction magnitude `μ(r, α)|σ̄_n| + C`.
    fn phi_prime(&self, ctx: &FrictionContext, rate: f64, alpha: f64) -> Result<f64, FrictionError> {
        Ok(self.mu(rate, alpha)? * ctx.sigma_n_bar + ctx.cohesion)
    }

    /// Energy density `φ_α(v) = ∫₀ᵛ μ(r, α)|σ̄_n| + C dr`.
    ///
    /// The default integrates [`FrictionLaw::phi_prime`] with composite
    /// Gauss–Legendre quadrature; laws with a closed form override it.
    fn phi(&self, ctx: &FrictionContext, v: f64, alpha: f64) -> Result<f64, FrictionError> {
        check_rate(v)?;
        gauss_legendre(|r| self.phi_prime(ctx, r, alpha), 0.0, v, 64)
    }
}

fn gauss_legendre<F>(f: F, lo: f64, hi: f64, panels: usize) -> Result<f64, FrictionError>
where
    F: Fn(f64) -> Result<f64, FrictionError>,
{
    const NODES: [(f64, f64); 5] = [
        (0.0, 0.568_888_888_888_888_9),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    if hi <= lo {
        return Ok(0.0);
    }
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = lo + (k as f64 + 0.5) * width;
        for (x, w) in NODES {
            total += w * f(mid + 0.5 * width * x)?;
        }
    }
    Ok(0.5 * width * total)
}

/// `asinh(z)` for `z ≥ 0` from its logarithmic representation, with a series
/// for small arguments.
pub fn asinh_nonneg(z: f64) -> f64 {
    if z < 1e-4 {
        let z2 = z * z;
        z * (1.0 - z2 / 6.0 + 3.0 * z2 * z2 / 40.0)
    } else if z > 1e150 {
        std::f64::consts::LN_2 + z.ln()
    } else {
        (z + z * z / (1.0 + (1.0 + z * z).sqrt())).ln_1p()
    }
}

/// `asinh(x / 2)` given `ln x`.
fn asinh_half_from_log(log_x: f64) -> f64 {
    if log_x > 40.0 {
        // asinh(x/2) = ln x + ln((1 + sqrt(1 + 4/x²))/2) = ln x + 1/x² + O(x⁻⁴)
        log_x + (-2.0 * log_x).exp()
    } else {
        asinh_nonneg(0.5 * log_x.exp())
    }
}

/// `r_min(α) = r* exp(−(μ* + bα)/a)`: the rate at which the logarithmic law
/// changes sign.
pub fn r_min(params: &RateStateParams, alpha: f64) -> Result<f64, FrictionError> {
    let exponent = params.r_min_exponent(alpha)?;
    Ok(params.r_star * guarded_exp("r_min", -exponent)?)
}

pub fn mu(variant: FrictionVariant, params: &RateStateParams, r: f64, alpha: f64) -> Result<f64, FrictionError> {
    check_rate(r)?;
    if r == 0.0 {
        params.r_min_exponent(alpha)?;
        return Ok(0.0);
    }
    let log_ratio = params.log_rate_ratio(r, alpha)?;
    Ok(match variant {
        FrictionVariant::Truncated => params.a * log_ratio.max(0.0),
        FrictionVariant::Regularized => params.a * asinh_half_from_log(log_ratio),
    })
}

pub fn phi_prime(
    ctx: &FrictionContext,
    variant: FrictionVariant,
    params: &RateStateParams,
    r: f64,
    alpha: f64,
) -> Result<f64, FrictionError> {
    Ok(mu(variant, params, r, alpha)? * ctx.sigma_n_bar + ctx.cohesion)
}

/// Closed-form `φ_α(v)`.
pub fn phi(
    ctx: &FrictionContext,
    variant: FrictionVariant,
    params: &RateStateParams,
    v: f64,
    alpha: f64,
) -> Result<f64, FrictionError> {
    check_rate(v)?;
    let cohesion_part = ctx.cohesion * v;
    if v == 0.0 {
        params.r_min_exponent(alpha)?;
        return Ok(0.0);
    }
    let log_ratio = params.log_rate_ratio(v, alpha)?;
    let mu_part = match variant {
        FrictionVariant::Truncated => {
            if log_ratio <= 0.0 {
                0.0
            } else {
                // a (v log(v/r_min) − v + r_min)
                let rm = r_min(params, alpha)?;
                params.a * (v * log_ratio - v + rm)
            }
        }
        FrictionVariant::Regularized => {
            // With z = v/(2 r_min): ∫₀ᵛ a asinh(r/(2 r_min)) dr
            //   = a v (asinh z − (sqrt(z² + 1) − 1)/z).
            let log_z = log_ratio - std::f64::consts::LN_2;
            let tail = if log_z > 300.0 {
                1.0 - (-log_z).exp()
            } else {
                let z = log_z.exp();
                z / (z.hypot(1.0) + 1.0)
            };
            params.a * v * (asinh_half_from_log(log_ratio) - tail)
        }
    };
    Ok(mu_part * ctx.sigma_n_bar + cohesion_part)
}

/// `A(α) = −(r*/L) e^{−α}`.
pub fn ageing_a(params: &RateStateParams, alpha: f64) -> Result<f64, FrictionError> {
    Ok(-(params.r_star / params.l_dc) * guarded_exp("ageing A", -alpha)?)
}

/// `f(r) = −r/L`, so that `α̇ + A(α) = f(r)` reads `α̇ = (r* e^{−α} − r)/L`.
pub fn ageing_f(params: &RateStateParams, r: f64) -> Result<f64, FrictionError> {
    check_rate(r)?;
    Ok(-r / params.l_dc)
}

/// The ageing law paired with one of the two nonnegative friction
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgeingLaw {
    pub variant: FrictionVariant,
    pub params: RateStateParams,
}

impl AgeingLaw {
    pub fn new(variant: FrictionVariant, params: RateStateParams) -> Result<Self, FrictionError> {
        params.validate()?;
        Ok(Self { variant, params })
    }

    /// Same parameters with the state effect switched off (`b = 0`).
    pub fn without_state_effect(mut self) -> Self {
        self.params.b = 0.0;
        self
    }
}

impl FrictionLaw for AgeingLaw {
    fn mu(&self, rate: f64, alpha: f64) -> Result<f64, FrictionError> {
        mu(self.variant, &self.params, rate, alpha)
    }

    fn state_decay(&self, alpha: f64) -> Result<f64, FrictionError> {
        ageing_a(&self.params, alpha)
    }

    fn state_source(&self, rate: f64) -> Result<f64, FrictionError> {
        ageing_f(&self.params, rate)
    }

    fn lipschitz_mu(&self) -> f64 {
        self.params.b
    }

    fn lipschitz_f(&self) -> f64 {
        1.0 / self.params.l_dc
    }

    fn growth_bound(&self, rate: f64, alpha: f64) -> Option<f64> {
        let p = &self.params;
        let truncated = p.a * rate / p.r_star + p.mu_star + p.b * alpha.abs();
        Some(match self.variant {
            FrictionVariant::Truncated => truncated,
            FrictionVariant::Regularized => p.a * std::f64::consts::LN_2 + truncated,
        })
    }

    fn phi_prime(&self, ctx: &FrictionContext, rate: f64, alpha: f64) -> Result<f64, FrictionError> {
        phi_prime(ctx, self.variant, &self.params, rate, alpha)
    }

    fn phi(&self, ctx: &FrictionContext, v: f64, alpha: f64) -> Result<f64, FrictionError> {
        phi(ctx, self.variant, &self.params, v, alpha)
    }
}

/// A law with its state source switched off (`f ≡ 0`), so the state only
/// follows `α̇ + A(α) = 0` whatever the slip history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WithoutSource<L>(pub L);

impl<L: FrictionLaw> FrictionLaw for WithoutSource<L> {
    fn mu(&self, rate: f64, alpha: f64) -> Result<f64, FrictionError> {
        self.0.mu(rate, alpha)
    }

    fn state_decay(&self, alpha: f64) -> Result<f64, FrictionError> {
        self.0.state_decay(alpha)
    }

    fn state_source(&self, rate: f64) -> Result<f64, FrictionError> {
        check_rate(rate)?;
        Ok(0.0)
    }

    fn lipschitz_mu(&self) -> f64 {
        self.0.lipschitz_mu()
    }

    fn lipschitz_f(&self) -> f64 {
        0.0
    }

    fn growth_bound(&self, rate: f64, alpha: f64) -> Option<f64> {
        self.0.growth_bound(rate, alpha)
    }

    fn phi_prime(&self, ctx: &FrictionContext, rate: f64, alpha: f64) -> Result<f64, FrictionError> {
        self.0.phi_prime(ctx, rate, alpha)
    }

    fn phi(&self, ctx: &FrictionContext, v: f64, alpha: f64) -> Result<f64, FrictionError> {
        self.0.phi(ctx, v, alpha)
    }
}
