//! Estimation core: OLS with conventional and HC1 errors, Newey-West
//! standard errors of a mean, Fama-MacBeth, per-ticker VAR(1), moving-block
//! bootstrap, Pearson correlation matrices and Welch's t-test.

mod bootstrap;
mod corr;
mod dist;
mod fmb;
mod hac;
mod ols;
mod ttest;
mod var;

use thiserror::Error;

pub use bootstrap::{block_bootstrap_pvalue, moving_block_indices, BootstrapConfig};
pub use corr::{corr_matrix, pearson, CorrMatrix, MIN_OVERLAP};
pub use dist::{t_two_sided_p, t_two_sided_p_or_normal};
pub use fmb::{fama_macbeth, CrossSection, FmbOptions, Term};
pub use hac::newey_west_se_of_mean;
pub use ols::{ols, ols_named, INTERCEPT};
pub use ttest::{welch_t_test, WelchResult};
pub use var::{var1, var1_pairs, var_aggregate, LagSample, VAR_MIN_WEEKS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconError {
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("too few observations: need more than {needed}, found {found}")]
    TooFewObservations { needed: usize, found: usize },
    #[error("too few usable weeks: need {needed}, found {found}")]
    TooFewWeeks { needed: usize, found: usize },
    #[error("every cross-section was degenerate")]
    AllWeeksDegenerate,
    #[error("empty input")]
    EmptyInput,
    #[error("bootstrap needs at least 100 replicates, got {0}")]
    RepsTooSmall(usize),
    #[error("block length must be at least 1")]
    InvalidBlockLen,
    #[error("series `{a}` and `{b}` overlap on {n} observations, need {needed}")]
    InsufficientOverlap {
        a: String,
        b: String,
        n: usize,
        needed: usize,
    },
    #[error("zero variance: {0}")]
    ZeroVariance(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// `***` p<0.01, `**` p<0.05, `*` p<0.10.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
