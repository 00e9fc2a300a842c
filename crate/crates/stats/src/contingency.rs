//! Tests on count tables: Pearson chi-squared, pooled two-proportion z,
//! and Wald odds ratios.

use serde::{Deserialize, Serialize};

use crate::special::{chi2_sf, normal_sf};
use crate::StatsError;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquaredResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson chi-squared test of independence on an r×c table.
pub fn chi_squared(table: &[Vec<f64>]) -> Result<ChiSquaredResult, StatsError> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 {
        return Err(StatsError::InvalidCount(format!(
            "table must be at least 2x2, got {rows}x{cols}"
        )));
    }
    if table.iter().any(|r| r.len() != cols) {
        return Err(StatsError::InvalidCount("ragged table".into()));
    }
    if table.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(StatsError::InvalidCount("counts must be finite and >= 0".into()));
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    if let Some(i) = row_sums.iter().position(|s| *s == 0.0) {
        return Err(StatsError::ZeroMargin(format!("row {i}")));
    }
    if let Some(j) = col_sums.iter().position(|s| *s == 0.0) {
        return Err(StatsError::ZeroMargin(format!("column {j}")));
    }
    let total: f64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, observed) in row.iter().enumerate() {
            let expected = row_sums[i] * col_sums[j] / total;
            statistic += (observed - expected).powi(2) / expected;
        }
    }
    let df = (rows - 1) * (cols - 1);
    Ok(ChiSquaredResult {
        statistic,
        df,
        p_value: chi2_sf(statistic, df as f64).clamp(0.0, 1.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZTestResult {
    pub z: f64,
    pub p_value: f64,
}

/// Pooled two-proportion z-test of k1/n1 against k2/n2, two-sided.
pub fn two_prop_z(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<ZTestResult, StatsError> {
    if n1 == 0 || n2 == 0 {
        return Err(StatsError::InvalidCount("group sizes must be positive".into()));
    }
    if k1 > n1 || k2 > n2 {
        return Err(StatsError::InvalidCount("successes exceed group size".into()));
    }
    let (k1, n1, k2, n2) = (k1 as f64, n1 as f64, k2 as f64, n2 as f64);
    let pooled = (k1 + k2) / (n1 + n2);
    if pooled <= 0.0 || pooled >= 1.0 {
        return Err(StatsError::NoVariance(format!("pooled proportion is {pooled}")));
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    let z = (k1 / n1 - k2 / n2) / se;
    Ok(ZTestResult {
        z,
        p_value: (2.0 * normal_sf(z.abs())).min(1.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OddsRatioResult {
    pub odds_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Standard error of ln(OR).
    pub log_se: f64,
    /// Whether the +0.5 zero-cell correction was applied.
    pub corrected: bool,
}

/// Odds ratio of the 2×2 table `[[a, b], [c, d]]` with a log-scale Wald
/// interval. Adds 0.5 to every cell when any cell is zero.
pub fn odds_ratio(a: u64, b: u64, c: u64, d: u64) -> Result<OddsRatioResult, StatsError> {
    if (a == 0 && b == 0) || (c == 0 && d == 0) {
        return Err(StatsError::ZeroMargin("a row of the 2x2 table is all zero".into()));
    }
    if (a == 0 && c == 0) || (b == 0 && d == 0) {
        return Err(StatsError::ZeroMargin("a column of the 2x2 table is all zero".into()));
    }
    let corrected = [a, b, c, d].contains(&0);
    let shift = if corrected { 0.5 } else { 0.0 };
    let [a, b, c, d] = [a, b, c, d].map(|v| v as f64 + shift);
    let ln_or = (a * d / (b * c)).ln();
    let log_se = (1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d).sqrt();
    Ok(OddsRatioResult {
        odds_ratio: ln_or.exp(),
        ci_low: (ln_or - Z_95 * log_se).exp(),
        ci_high: (ln_or + Z_95 * log_se).exp(),
        log_se,
        corrected,
    })
}
