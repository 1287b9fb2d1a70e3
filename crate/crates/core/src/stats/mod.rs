//! Statistical kernels behind the analyses: correlation, regression of
//! release intervals, payoff projection, exposure odds and direction KDE.

mod correlation;
mod descriptive;
mod kde;
mod odds;
mod regression;

pub use correlation::{pearson_log, Correlation};
pub use descriptive::{quantile, summarize, Summary};
pub use kde::{kde, KdeOptions, DEFAULT_GRID_POINTS, GRID_MAX, GRID_MIN};
pub use odds::{contingency, fisher_exact_two_sided, odds_analysis, ContingencyTable, OddsResult, WOOLF_Z};
pub use regression::{
    build_regression_dataset, ols_fit, RegressionDataset, RegressionExclusions, RegressionResult,
    REGRESSION_COLUMNS,
};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::metrics::ChangeRecord;
use crate::model::Coordinate;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("value at position {index} is not positive; logarithm undefined")]
    NonPositive { index: usize },
    #[error("input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("correlation undefined: zero variance")]
    ZeroVariance,
    #[error("design is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("response is constant; R-squared undefined")]
    ConstantResponse,
    #[error("no rows left for the regression")]
    EmptyDataset,
    #[error("odds ratio undefined: table has a zero cell (Fisher p = {fisher_p})")]
    ZeroCell { fisher_p: f64 },
    #[error("bandwidth cannot be estimated from a single distinct value; pass an explicit bandwidth")]
    DegenerateBandwidth,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl StatsError {
    /// Stable identifier used in machine-readable error reports.
    pub fn code(&self) -> &'static str {
        match self {
            StatsError::TooFewObservations { .. } => "too_few_observations",
            StatsError::NonPositive { .. } => "non_positive",
            StatsError::LengthMismatch { .. } => "length_mismatch",
            StatsError::ZeroVariance => "zero_variance",
            StatsError::RankDeficient { .. } => "rank_deficient",
            StatsError::ConstantResponse => "constant_response",
            StatsError::EmptyDataset => "empty_dataset",
            StatsError::ZeroCell { .. } => "zero_cell",
            StatsError::DegenerateBandwidth => "degenerate_bandwidth",
            StatsError::InvalidArgument(_) => "invalid_argument",
        }
    }
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom:
/// `I_{df/(df+t^2)}(df/2, 1/2)`. Stays accurate far into the tail.
pub(crate) fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    statrs::function::beta::beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// `Λ^β`: factor by which the release interval grows when leverage grows
/// by `Λ`.
pub fn payoff_ratio(lambda: f64, beta: f64) -> f64 {
    lambda.powf(beta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxLeveragePoint {
    pub ga: Coordinate,
    pub vuln_count: u64,
    pub max_lambda_dir: f64,
}

/// For every library and every vulnerability count seen among its releases,
/// the highest direct leverage of the releases with that count. Sorted by
/// library, then count.
pub fn max_leverage_by_vuln_count(records: &[ChangeRecord]) -> Vec<MaxLeveragePoint> {
    let mut best: BTreeMap<(&Coordinate, u64), f64> = BTreeMap::new();
    for r in records {
        if r.lambda_dir.is_nan() {
            continue;
        }
        let slot = best.entry((&r.gav_to.coordinate, r.vulns)).or_insert(f64::NEG_INFINITY);
        *slot = slot.max(r.lambda_dir);
    }
    best.into_iter()
        .map(|((ga, vuln_count), max_lambda_dir)| MaxLeveragePoint {
            ga: ga.clone(),
            vuln_count,
            max_lambda_dir,
        })
        .collect()
}
