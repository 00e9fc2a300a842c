use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::AnnotationRun;
use crate::AnnotateError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub n: usize,
    /// Fraction of positions with identical labels.
    pub percent: f64,
    /// Unweighted Cohen's κ; `None` when chance agreement is 1.
    pub kappa: Option<f64>,
}

/// Percent agreement and Cohen's κ of two aligned label sequences.
pub fn agreement<T: Ord>(a: &[T], b: &[T]) -> Result<Agreement, AnnotateError> {
    if a.len() != b.len() {
        return Err(AnnotateError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(AnnotateError::Empty);
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut ma: BTreeMap<&T, f64> = BTreeMap::new();
    let mut mb: BTreeMap<&T, f64> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *ma.entry(x).or_default() += 1.0;
        *mb.entry(y).or_default() += 1.0;
    }
    let expected: f64 = ma
        .iter()
        .map(|(k, ca)| ca / n * mb.get(k).copied().unwrap_or(0.0) / n)
        .sum();
    let kappa = if (1.0 - expected).abs() < 1e-15 {
        None
    } else {
        Some((observed - expected) / (1.0 - expected))
    };
    Ok(Agreement {
        n: a.len(),
        percent: observed,
        kappa,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAgreement {
    pub first: String,
    pub second: String,
    pub percent: f64,
    pub kappa: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub n: usize,
    pub identical_fraction: f64,
    pub two_of_three_fraction: f64,
    pub all_differ_fraction: f64,
    pub pairwise: Vec<PairAgreement>,
}

/// How consistently three runs labelled the same utterances.
pub fn stability(runs: &[AnnotationRun]) -> Result<StabilityReport, AnnotateError> {
    if runs.len() != 3 {
        return Err(AnnotateError::RunCount(runs.len()));
    }
    let all: BTreeSet<_> = runs.iter().flat_map(|r| r.labels.keys()).collect();
    let missing: Vec<String> = all
        .iter()
        .filter(|k| runs.iter().any(|r| !r.labels.contains_key(**k)))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(AnnotateError::Coverage(missing));
    }
    if all.is_empty() {
        return Err(AnnotateError::Empty);
    }
    let columns: Vec<Vec<&String>> = runs
        .iter()
        .map(|r| all.iter().map(|k| &r.labels[*k]).collect())
        .collect();
    let n = all.len();
    let mut buckets = [0usize; 3];
    for i in 0..n {
        let distinct: BTreeSet<&String> = columns.iter().map(|c| c[i]).collect();
        buckets[distinct.len() - 1] += 1;
    }
    let mut pairwise = Vec::new();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let a = agreement(&columns[i], &columns[j])?;
        pairwise.push(PairAgreement {
            first: runs[i].run_id.clone(),
            second: runs[j].run_id.clone(),
            percent: a.percent,
            kappa: a.kappa,
        });
    }
    let nf = n as f64;
    Ok(StabilityReport {
        n,
        identical_fraction: buckets[0] as f64 / nf,
        two_of_three_fraction: buckets[1] as f64 / nf,
        all_differ_fraction: buckets[2] as f64 / nf,
        pairwise,
    })
}
