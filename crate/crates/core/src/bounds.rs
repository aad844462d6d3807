//! Closed-form tail bounds and expectation calculators.
//!
//! These feed the experiment harness: they turn (mu, delta, t, increment
//! bounds) into probability bounds, plan Monte-Carlo trial counts, and
//! evaluate the expected-rounds integral for size-decreasing processes.
//! All exponents are evaluated in log space so legitimately huge arguments
//! never overflow.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("delta {delta} outside the validity window [{min}, {max}]")]
    DeltaOutOfRange { delta: f64, min: f64, max: f64 },
    #[error("threshold {t} below the validity floor {min}")]
    ThresholdTooSmall { t: f64, min: f64 },
    #[error("increment bound list must be nonempty")]
    EmptyBounds,
    #[error("increment bounds must be nonnegative")]
    NegativeBound,
    #[error("interval list contains a pair with upper bound below lower bound")]
    InvalidInterval,
    #[error("all increment bounds are zero but t > 0")]
    ZeroDenominator,
    #[error("argument {name} = {value} out of range")]
    InvalidArgument { name: &'static str, value: f64 },
    #[error("integrand must be positive on the domain; mu({at}) <= 0")]
    NonPositiveIntegrand { at: f64 },
}

/// Inputs shared by the tail-bound calculators. Fill in what the chosen
/// bound needs; the rest is ignored.
#[derive(Debug, Clone, Default)]
pub struct BoundQuery {
    /// Expectation of the sum.
    pub mu: f64,
    /// Relative deviation.
    pub delta: f64,
    /// Absolute deviation (also carries R for the power-of-two variant).
    pub t: f64,
    /// Symmetric increment bounds |X_i| <= c_i.
    pub c: Vec<f64>,
    /// Asymmetric increment bounds a_i <= X_i <= b_i.
    pub ab: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChernoffVariant {
    /// (e^delta / (1+delta)^(1+delta))^mu, valid for all delta >= 0.
    Classic,
    /// exp(-mu delta^2 / 3), valid for 0 <= delta <= 1.81.
    Third,
    /// exp(-mu delta^2 / 4), valid for 0 <= delta <= 4.11.
    Fourth,
    /// Pr[X >= R] <= 2^-R, valid for R >= 2 e mu; R is passed in `t`.
    PowerOfTwoR,
}

pub const THIRD_VARIANT_DELTA_MAX: f64 = 1.81;
pub const FOURTH_VARIANT_DELTA_MAX: f64 = 4.11;

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn require_nonneg(name: &'static str, value: f64) -> Result<(), BoundsError> {
    if !value.is_finite() || value < 0.0 {
        return Err(BoundsError::InvalidArgument { name, value });
    }
    Ok(())
}

/// Upper tail Pr[X >= (1+delta) mu] for a sum of independent 0-1 variables.
pub fn chernoff_upper(q: &BoundQuery, variant: ChernoffVariant) -> Result<f64, BoundsError> {
    require_nonneg("mu", q.mu)?;
    match variant {
        ChernoffVariant::Classic => {
            require_nonneg("delta", q.delta)?;
            // log of the base: delta - (1+delta) ln(1+delta)
            let log_base = q.delta - (1.0 + q.delta) * q.delta.ln_1p();
            Ok(clamp_unit((q.mu * log_base).exp()))
        }
        ChernoffVariant::Third => {
            if !(0.0..=THIRD_VARIANT_DELTA_MAX).contains(&q.delta) {
                return Err(BoundsError::DeltaOutOfRange {
                    delta: q.delta,
                    min: 0.0,
                    max: THIRD_VARIANT_DELTA_MAX,
                });
            }
            Ok(clamp_unit((-q.mu * q.delta * q.delta / 3.0).exp()))
        }
        ChernoffVariant::Fourth => {
            if !(0.0..=FOURTH_VARIANT_DELTA_MAX).contains(&q.delta) {
                return Err(BoundsError::DeltaOutOfRange {
                    delta: q.delta,
                    min: 0.0,
                    max: FOURTH_VARIANT_DELTA_MAX,
                });
            }
            Ok(clamp_unit((-q.mu * q.delta * q.delta / 4.0).exp()))
        }
        ChernoffVariant::PowerOfTwoR => {
            let floor = 2.0 * std::f64::consts::E * q.mu;
            if !q.t.is_finite() || q.t < floor {
                return Err(BoundsError::ThresholdTooSmall { t: q.t, min: floor });
            }
            Ok(clamp_unit((-q.t).exp2()))
        }
    }
}

/// Lower tail Pr[X <= (1-delta) mu] <= exp(-mu delta^2 / 2), 0 <= delta <= 1.
pub fn chernoff_lower(q: &BoundQuery) -> Result<f64, BoundsError> {
    require_nonneg("mu", q.mu)?;
    if !(0.0..=1.0).contains(&q.delta) {
        return Err(BoundsError::DeltaOutOfRange {
            delta: q.delta,
            min: 0.0,
            max: 1.0,
        });
    }
    Ok(clamp_unit((-q.mu * q.delta * q.delta / 2.0).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoeffdingForm {
    /// |X_i| <= c_i, zero means: exp(-t^2 / (2 sum c_i^2)).
    Symmetric,
    /// a_i <= X_i <= b_i, zero means: exp(-2 t^2 / sum (b_i - a_i)^2).
    Asymmetric,
}

/// Tail bound for a sum of bounded independent zero-mean variables.
pub fn hoeffding(q: &BoundQuery, form: HoeffdingForm) -> Result<f64, BoundsError> {
    require_nonneg("t", q.t)?;
    let denominator = match form {
        HoeffdingForm::Symmetric => {
            if q.c.is_empty() {
                return Err(BoundsError::EmptyBounds);
            }
            if q.c.iter().any(|&c| c < 0.0) {
                return Err(BoundsError::NegativeBound);
            }
            2.0 * q.c.iter().map(|c| c * c).sum::<f64>()
        }
        HoeffdingForm::Asymmetric => {
            if q.ab.is_empty() {
                return Err(BoundsError::EmptyBounds);
            }
            if q.ab.iter().any(|&(a, b)| b < a) {
                return Err(BoundsError::InvalidInterval);
            }
            0.5 * q.ab.iter().map(|(a, b)| (b - a) * (b - a)).sum::<f64>()
        }
    };
    if q.t == 0.0 {
        return Ok(1.0);
    }
    if denominator == 0.0 {
        return Err(BoundsError::ZeroDenominator);
    }
    Ok(clamp_unit((-q.t * q.t / denominator).exp()))
}

/// Bounded-difference tail: Pr[f - E[f] >= t] <= exp(-2 t^2 / sum c_i^2).
pub fn mcdiarmid(q: &BoundQuery) -> Result<f64, BoundsError> {
    require_nonneg("t", q.t)?;
    if q.c.is_empty() {
        return Err(BoundsError::EmptyBounds);
    }
    if q.c.iter().any(|&c| c < 0.0) {
        return Err(BoundsError::NegativeBound);
    }
    if q.t == 0.0 {
        return Ok(1.0);
    }
    let sum_sq: f64 = q.c.iter().map(|c| c * c).sum();
    if sum_sq == 0.0 {
        return Err(BoundsError::ZeroDenominator);
    }
    Ok(clamp_unit((-2.0 * q.t * q.t / sum_sq).exp()))
}

/// Monte-Carlo plan: enough samples for relative error `epsilon` with
/// failure probability `confidence_delta` when the hit rate is at least `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPlan {
    pub epsilon: f64,
    pub confidence_delta: f64,
    pub rho: f64,
    pub n_trials: u64,
}

/// n_trials = ceil((3 / (epsilon^2 rho)) ln(2 / confidence_delta)).
pub fn trials_needed(
    epsilon: f64,
    confidence_delta: f64,
    rho: f64,
) -> Result<TrialPlan, BoundsError> {
    if !(epsilon > 0.0 && epsilon <= THIRD_VARIANT_DELTA_MAX) {
        return Err(BoundsError::InvalidArgument {
            name: "epsilon",
            value: epsilon,
        });
    }
    if !(confidence_delta > 0.0 && confidence_delta < 1.0) {
        return Err(BoundsError::InvalidArgument {
            name: "confidence_delta",
            value: confidence_delta,
        });
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(BoundsError::InvalidArgument {
            name: "rho",
            value: rho,
        });
    }
    let raw = 3.0 / (epsilon * epsilon * rho) * (2.0 / confidence_delta).ln();
    Ok(TrialPlan {
        epsilon,
        confidence_delta,
        rho,
        n_trials: raw.ceil().max(1.0) as u64,
    })
}

/// Upper bound on the expected rounds of a process that shrinks from `n`
/// to `a`, losing at least `mu(x)` per round on average: the integral of
/// 1/mu over (a, n].
///
/// The domain is split at integer breakpoints so ceiling-style step
/// integrands are handled exactly; each piece uses adaptive Gauss-Legendre
/// quadrature (interior nodes only) to relative error 1e-9.
pub fn kuw_expected_rounds<F>(a: f64, n: f64, mu: F) -> Result<f64, BoundsError>
where
    F: Fn(f64) -> f64,
{
    if !a.is_finite() || !n.is_finite() || a >= n {
        return Err(BoundsError::InvalidArgument {
            name: "a..n",
            value: a,
        });
    }
    let integrand = |t: f64| -> Result<f64, BoundsError> {
        let m = mu(t);
        if m.is_nan() || m <= 0.0 {
            return Err(BoundsError::NonPositiveIntegrand { at: t });
        }
        Ok(1.0 / m)
    };
    let mut total = 0.0;
    let mut lo = a;
    while lo < n {
        let hi = (lo.floor() + 1.0).min(n);
        let hi = if hi > lo { hi } else { n };
        let whole = gauss8(&integrand, lo, hi)?;
        total += adaptive(&integrand, lo, hi, whole, 0)?;
        lo = hi;
    }
    Ok(total)
}

const GAUSS8_NODES: [f64; 4] = [
    0.1834346424956498,
    0.525_532_409_916_329,
    0.7966664774136267,
    0.9602898564975363,
];
const GAUSS8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

fn gauss8<F>(f: &F, lo: f64, hi: f64) -> Result<f64, BoundsError>
where
    F: Fn(f64) -> Result<f64, BoundsError>,
{
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (lo + hi);
    let mut acc = 0.0;
    for i in 0..4 {
        acc += GAUSS8_WEIGHTS[i]
            * (f(mid - half * GAUSS8_NODES[i])? + f(mid + half * GAUSS8_NODES[i])?);
    }
    Ok(acc * half)
}

fn adaptive<F>(f: &F, lo: f64, hi: f64, whole: f64, depth: u32) -> Result<f64, BoundsError>
where
    F: Fn(f64) -> Result<f64, BoundsError>,
{
    let mid = 0.5 * (lo + hi);
    let left = gauss8(f, lo, mid)?;
    let right = gauss8(f, mid, hi)?;
    let refined = left + right;
    if depth >= 40 || (refined - whole).abs() <= 1e-9 * refined.abs().max(1e-300) {
        return Ok(refined);
    }
    Ok(adaptive(f, lo, mid, left, depth + 1)? + adaptive(f, mid, hi, right, depth + 1)?)
}

/// Partial harmonic sum H_n, accumulated small-to-large with compensation.
pub fn harmonic(n: u64) -> f64 {
    assert!(n >= 1, "harmonic requires n >= 1");
    let mut sum = 0.0;
    let mut carry = 0.0;
    for i in (1..=n).rev() {
        let term = 1.0 / i as f64 - carry;
        let next = sum + term;
        carry = (next - sum) - term;
        sum = next;
    }
    sum
}
