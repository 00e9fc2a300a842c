use serde::{Deserialize, Serialize};

use crate::StatsError;

/// Empirical CDF: a right-continuous step function over a sorted sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(samples: &[f64]) -> Result<Self, StatsError> {
        if samples.is_empty() {
            return Err(StatsError::Empty);
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    /// Fraction of the sample that is `<= x`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.sorted.partition_point(|s| *s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sample(&self) -> &[f64] {
        &self.sorted
    }

    /// The jump points `(x, F(x))`, one per distinct sample value.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, x) in self.sorted.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == *x => last.1 = f,
                _ => out.push((*x, f)),
            }
        }
        out
    }
}

/// Convenience wrapper matching the other free functions in this crate.
pub fn ecdf(samples: &[f64]) -> Result<Ecdf, StatsError> {
    Ecdf::new(samples)
}
