use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::contingency::Z_95;
use crate::special::normal_sf;
use crate::StatsError;

pub const INTERCEPT: &str = "intercept";
pub const SCORE_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 100;

/// Linear predictors at which a fitted probability is treated as saturated.
const SATURATED_ETA: f64 = 25.0;
const COLLINEAR_TOLERANCE: f64 = 1e-10;

/// Design matrix with a leading intercept column.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    names: Vec<String>,
    x: DMatrix<f64>,
}

impl Design {
    /// Builds a design from named predictor columns. An intercept column is
    /// prepended; predictors keep the order given.
    pub fn new<S: AsRef<str>>(columns: &[(S, Vec<f64>)]) -> Result<Self, StatsError> {
        let rows = columns.first().map(|c| c.1.len()).unwrap_or(0);
        if rows == 0 {
            return Err(StatsError::Empty);
        }
        let mut names = vec![INTERCEPT.to_string()];
        for (name, col) in columns {
            if col.len() != rows {
                return Err(StatsError::LengthMismatch(rows, col.len()));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite);
            }
            names.push(name.as_ref().to_string());
        }
        let x = DMatrix::from_fn(rows, names.len(), |r, c| {
            if c == 0 {
                1.0
            } else {
                columns[c - 1].1[r]
            }
        });
        Ok(Design { names, x })
    }

    /// Intercept-only design.
    pub fn intercept_only(rows: usize) -> Result<Self, StatsError> {
        if rows == 0 {
            return Err(StatsError::Empty);
        }
        Ok(Design {
            names: vec![INTERCEPT.to_string()],
            x: DMatrix::from_element(rows, 1, 1.0),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn columns(&self) -> usize {
        self.x.ncols()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Intercept first, then predictors in design order.
    pub coefficients: Vec<Coefficient>,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: f64,
    /// Largest absolute score component at the returned estimate.
    pub max_score: f64,
    /// Set when fitted probabilities saturate at 0 or 1 (perfect or
    /// quasi-complete separation); estimates are then unreliable.
    pub separation: bool,
    pub warnings: Vec<String>,
    pub n: usize,
}

impl RegressionFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn beta(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^eta) without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

/// Bernoulli log-likelihood of `y` under coefficients `beta`.
pub fn log_likelihood(design: &Design, y: &[bool], beta: &[f64]) -> f64 {
    let eta = &design.x * DVector::from_column_slice(beta);
    eta.iter()
        .zip(y)
        .map(|(e, yi)| if *yi { e - softplus(*e) } else { -softplus(*e) })
        .sum()
}

/// Gradient of the log-likelihood, `X'(y - p)`.
pub fn score(design: &Design, y: &[bool], beta: &[f64]) -> Vec<f64> {
    let eta = &design.x * DVector::from_column_slice(beta);
    let resid = DVector::from_iterator(
        y.len(),
        eta.iter()
            .zip(y)
            .map(|(e, yi)| f64::from(u8::from(*yi)) - sigmoid(*e)),
    );
    (design.x.transpose() * resid).iter().copied().collect()
}

fn information(design: &Design, beta: &DVector<f64>) -> DMatrix<f64> {
    let eta = &design.x * beta;
    let mut weighted = design.x.clone();
    for (r, e) in eta.iter().enumerate() {
        let p = sigmoid(*e);
        let w = p * (1.0 - p);
        for c in 0..weighted.ncols() {
            weighted[(r, c)] *= w;
        }
    }
    design.x.transpose() * weighted
}

/// Finds a column lying in the span of the preceding ones and names it along
/// with the columns it depends on.
fn collinear_columns(design: &Design) -> Option<Vec<String>> {
    let x = &design.x;
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..x.ncols() {
        let col = x.column(j).into_owned();
        let norm = col.norm();
        let mut resid = col.clone();
        for q in &basis {
            let proj = q.dot(&resid);
            resid -= q * proj;
        }
        if norm == 0.0 || resid.norm() <= COLLINEAR_TOLERANCE * norm.max(1.0) {
            let mut names = Vec::new();
            if !kept.is_empty() {
                let sub = x.select_columns(kept.iter());
                if let Ok(coef) = sub.clone().svd(true, true).solve(&col, 1e-12) {
                    for (k, c) in kept.iter().zip(coef.iter()) {
                        if c.abs() > 1e-8 {
                            names.push(design.names[*k].clone());
                        }
                    }
                }
            }
            names.push(design.names[j].clone());
            return Some(names);
        }
        basis.push(resid.clone() / resid.norm());
        kept.push(j);
    }
    None
}

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares. Stops when the largest score component drops below
/// [`SCORE_TOLERANCE`] or after [`MAX_ITERATIONS`] Newton steps.
pub fn logistic_fit(design: &Design, y: &[bool]) -> Result<RegressionFit, StatsError> {
    let n = design.rows();
    let p = design.columns();
    if y.len() != n {
        return Err(StatsError::LengthMismatch(n, y.len()));
    }
    if n < p + 1 {
        return Err(StatsError::TooFewObservations { needed: p + 1, got: n });
    }
    if y.iter().all(|v| *v == y[0]) {
        return Err(StatsError::Constant("outcome".into()));
    }
    if let Some(cols) = collinear_columns(design) {
        return Err(StatsError::Collinear(cols));
    }

    let mut beta = DVector::<f64>::zeros(p);
    let mut ll = log_likelihood(design, y, beta.as_slice());
    let mut converged = false;
    let mut iterations = 0;
    let mut max_score = f64::INFINITY;
    let mut warnings = Vec::new();
    while iterations <= MAX_ITERATIONS {
        let s = DVector::from_vec(score(design, y, beta.as_slice()));
        max_score = s.amax();
        if max_score < SCORE_TOLERANCE {
            converged = true;
            break;
        }
        if iterations == MAX_ITERATIONS {
            break;
        }
        iterations += 1;
        let info = information(design, &beta);
        let Some(step) = info.clone().cholesky().map(|c| c.solve(&s)) else {
            warnings.push(format!(
                "information matrix became singular at iteration {iterations}"
            ));
            break;
        };
        // Step halving keeps the likelihood non-decreasing.
        let mut scale = 1.0;
        let mut next = &beta + &step;
        let mut next_ll = log_likelihood(design, y, next.as_slice());
        while next_ll < ll - 1e-12 * ll.abs().max(1.0) && scale > 1e-10 {
            scale *= 0.5;
            next = &beta + &step * scale;
            next_ll = log_likelihood(design, y, next.as_slice());
        }
        if scale <= 1e-10 {
            warnings.push("step halving failed to improve the likelihood".into());
            break;
        }
        beta = next;
        ll = next_ll;
    }

    let eta = &design.x * &beta;
    let separation = eta.iter().any(|e| e.abs() > SATURATED_ETA);
    if separation {
        converged = false;
        warnings.push(
            "fitted probabilities saturate at 0 or 1; the outcome is (quasi-)separated and estimates diverge"
                .into(),
        );
    } else if !converged {
        warnings.push(format!(
            "did not converge in {MAX_ITERATIONS} iterations (max score {max_score:.3e})"
        ));
    }

    let cov = information(design, &beta).try_inverse();
    let coefficients = design
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let estimate = beta[j];
            let se = cov
                .as_ref()
                .map(|c| c[(j, j)].max(0.0).sqrt())
                .unwrap_or(f64::NAN);
            let z = estimate / se;
            Coefficient {
                name: name.clone(),
                estimate,
                se,
                ci_low: estimate - Z_95 * se,
                ci_high: estimate + Z_95 * se,
                z,
                p_value: (2.0 * normal_sf(z.abs())).min(1.0),
            }
        })
        .collect();

    Ok(RegressionFit {
        coefficients,
        converged,
        iterations,
        log_likelihood: ll,
        max_score,
        separation,
        warnings,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grouped(cells: &[(f64, usize, usize)]) -> (Design, Vec<bool>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (xv, wins, losses) in cells {
            for _ in 0..*wins {
                x.push(*xv);
                y.push(true);
            }
            for _ in 0..*losses {
                x.push(*xv);
                y.push(false);
            }
        }
        (Design::new(&[("x", x)]).unwrap(), y)
    }

    #[test]
    fn saturated_two_by_two() {
        let (d, y) = grouped(&[(1.0, 30, 20), (0.0, 10, 40)]);
        let fit = logistic_fit(&d, &y).unwrap();
        assert!(fit.converged);
        assert!((fit.coefficients[1].estimate - 6f64.ln()).abs() < 1e-6);
        assert!((fit.coefficients[0].estimate - 0.25f64.ln()).abs() < 1e-6);
        // Wald SE of a log odds ratio is sqrt(sum 1/cell).
        let se = (1.0 / 30.0 + 1.0 / 20.0 + 1.0 / 10.0 + 1.0 / 40.0f64).sqrt();
        assert!((fit.coefficients[1].se - se).abs() < 1e-8);
        let c = &fit.coefficients[1];
        assert!((c.ci_high - c.estimate - 1.96 * c.se).abs() < 1e-12);
    }

    #[test]
    fn constant_outcome_errors() {
        let d = Design::new(&[("x", vec![1.0, 2.0, 3.0, 4.0])]).unwrap();
        assert!(matches!(
            logistic_fit(&d, &[true; 4]),
            Err(StatsError::Constant(_))
        ));
    }

    #[test]
    fn collinear_columns_named() {
        let a = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 1.0).collect();
        let d = Design::new(&[("a", a), ("b", b)]).unwrap();
        let y = [true, false, true, false, false, true];
        match logistic_fit(&d, &y) {
            Err(StatsError::Collinear(cols)) => {
                assert_eq!(cols, vec!["intercept", "a", "b"]);
            }
            other => panic!("expected collinearity error, got {other:?}"),
        }
        let d = Design::new(&[("k", vec![3.0; 6])]).unwrap();
        assert!(matches!(logistic_fit(&d, &y), Err(StatsError::Collinear(_))));
    }

    #[test]
    fn separation_flagged() {
        let d = Design::new(&[("x", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0])]).unwrap();
        let y = [false, false, false, true, true, true];
        let fit = logistic_fit(&d, &y).unwrap();
        assert!(fit.separation);
        assert!(!fit.converged);
        assert!(!fit.warnings.is_empty());
    }

    #[test]
    fn too_few_rows() {
        let d = Design::new(&[("x", vec![0.0, 1.0])]).unwrap();
        assert!(matches!(
            logistic_fit(&d, &[true, false]),
            Err(StatsError::TooFewObservations { needed: 3, got: 2 })
        ));
    }
}
