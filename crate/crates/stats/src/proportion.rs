use serde::{Deserialize, Serialize};

use crate::contingency::Z_95;

/// Continuity-corrected proportion `(count + 0.5) / (total + 1)`.
pub fn corrected_proportion(count: u64, total: u64) -> f64 {
    (count as f64 + 0.5) / (total as f64 + 1.0)
}

/// Logit of the continuity-corrected proportion. The correction is always
/// applied so that 0 and `total` map to finite values.
pub fn logit_prop(count: u64, total: u64) -> f64 {
    let p = corrected_proportion(count, total);
    (p / (1.0 - p)).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogitProportion {
    pub count: u64,
    pub total: u64,
    /// Raw `count / total` (0 when `total` is 0).
    pub proportion: f64,
    pub logit: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Logit proportion with a Wald interval on the logit scale,
/// `se = sqrt(1/(k+0.5) + 1/(n-k+0.5))`.
pub fn logit_prop_interval(count: u64, total: u64) -> LogitProportion {
    let logit = logit_prop(count, total);
    let se = (1.0 / (count as f64 + 0.5) + 1.0 / ((total - count.min(total)) as f64 + 0.5)).sqrt();
    LogitProportion {
        count,
        total,
        proportion: if total == 0 { 0.0 } else { count as f64 / total as f64 },
        logit,
        se,
        ci_low: logit - Z_95 * se,
        ci_high: logit + Z_95 * se,
    }
}
