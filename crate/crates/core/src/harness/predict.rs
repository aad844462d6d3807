//! Closed-form predictions for the statistics the suites observe.

use super::HarnessError;
use crate::bounds::harmonic;

/// Parameters for [`predict`]; metrics read the fields they need.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PredictParams {
    /// Structure size / stream length.
    pub n: Option<u64>,
    /// Key rank (depth and rotation formulas).
    pub rank: Option<u64>,
    /// Probability knob (promotion or success probability).
    pub p: Option<f64>,
    /// Filter bit count.
    pub m: Option<u64>,
    /// Filter hash count.
    pub k: Option<u64>,
}

fn need(
    metric: &'static str,
    param: &'static str,
    value: Option<u64>,
) -> Result<u64, HarnessError> {
    value.ok_or(HarnessError::MissingParam { metric, param })
}

fn need_f64(
    metric: &'static str,
    param: &'static str,
    value: Option<f64>,
) -> Result<f64, HarnessError> {
    value.ok_or(HarnessError::MissingParam { metric, param })
}

/// Exact expectation (or probability floor) for a named metric.
pub fn predict(metric: &str, params: &PredictParams) -> Result<f64, HarnessError> {
    match metric {
        // Mean comparisons of randomized quicksort on n distinct keys.
        "quicksort_comparisons" => {
            let n = need("quicksort_comparisons", "n", params.n)?;
            if n == 0 {
                return Ok(0.0);
            }
            Ok(2.0 * (n as f64 + 1.0) * harmonic(n) - 4.0 * n as f64)
        }
        // Mean depth of the rank-j key among n treap keys.
        "treap_depth" => {
            let n = need("treap_depth", "n", params.n)?;
            let j = need("treap_depth", "rank", params.rank)?;
            if j < 1 || j > n {
                return Err(HarnessError::InvalidParam(
                    "rank",
                    format!("{j} not in 1..={n}"),
                ));
            }
            Ok(harmonic(j) + harmonic(n - j + 1) - 2.0)
        }
        // Mean sink-to-leaf rotations deleting the rank-l key among n.
        "treap_delete_rotations" => {
            let n = need("treap_delete_rotations", "n", params.n)?;
            let l = need("treap_delete_rotations", "rank", params.rank)?;
            if l < 1 || l > n {
                return Err(HarnessError::InvalidParam(
                    "rank",
                    format!("{l} not in 1..={n}"),
                ));
            }
            Ok(2.0 - 1.0 / l as f64 - 1.0 / (n - l + 1) as f64)
        }
        // Mean forward links per element at promotion probability p.
        "skiplist_links" => {
            let p = need_f64("skiplist_links", "p", params.p)?;
            if !(0.0..1.0).contains(&p) {
                return Err(HarnessError::InvalidParam("p", format!("{p} not in [0,1)")));
            }
            Ok(1.0 / (1.0 - p))
        }
        // Probability a fixed filter bit is set after n insertions.
        "bloom_bit_probability" => {
            let m = need("bloom_bit_probability", "m", params.m)?;
            let k = need("bloom_bit_probability", "k", params.k)?;
            let n = need("bloom_bit_probability", "n", params.n)?;
            if m < 2 {
                return Err(HarnessError::InvalidParam("m", format!("{m} < 2")));
            }
            let ln_miss = (k as f64 * n as f64) * (-1.0 / m as f64).ln_1p();
            Ok(-(ln_miss.exp() - 1.0))
        }
        // Mean throws to fill all n bins.
        "coupon_collector" => {
            let n = need("coupon_collector", "n", params.n)?;
            if n == 0 {
                return Err(HarnessError::InvalidParam("n", "0".into()));
            }
            Ok(n as f64 * harmonic(n))
        }
        // Mean trials to the first success.
        "geometric_mean" => {
            let p = need_f64("geometric_mean", "p", params.p)?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(HarnessError::InvalidParam("p", format!("{p} not in (0,1]")));
            }
            Ok(1.0 / p)
        }
        // Single-run success floor for contraction on n vertices.
        "karger_success_floor" => {
            let n = need("karger_success_floor", "n", params.n)?;
            if n < 2 {
                return Err(HarnessError::InvalidParam("n", format!("{n} < 2")));
            }
            Ok(2.0 / (n as f64 * (n as f64 - 1.0)))
        }
        other => Err(HarnessError::UnknownMetric(other.to_string())),
    }
}
