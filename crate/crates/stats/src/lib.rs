//! Descriptive and inferential statistics for game corpora.

pub mod contingency;
pub mod correlation;
pub mod ecdf;
mod error;
pub mod logistic;
pub mod proportion;
pub mod special;

pub use contingency::{
    chi_squared, odds_ratio, two_prop_z, ChiSquaredResult, OddsRatioResult, ZTestResult, Z_95,
};
pub use correlation::{pearson, spearman, CorrelationResult, SpearmanResult};
pub use ecdf::{ecdf, Ecdf};
pub use error::StatsError;
pub use logistic::{logistic_fit, Coefficient, Design, RegressionFit};
pub use proportion::{logit_prop, logit_prop_interval, LogitProportion};
