//! Ensemble forecasting: per-seed runs, seed filtering, growth extraction
//! and forecast error metrics.

mod ensemble;
mod growth;
mod metrics;
mod size;

use thiserror::Error;

pub use ensemble::{
    ensemble_stats, filter_seeds, run_seed, EnsembleResult, ExcludedSeed, Exclusion, FilterPolicy,
    FilterReport, SeedRun, DEFAULT_SEEDS, GROWTH_WINDOW,
};
pub use growth::{ols_growth, point_to_point_growth, GrowthFit};
pub use metrics::{error_metrics, ErrorMetrics};
pub use size::{firm_size_distribution, SizeDistribution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForecastError {
    #[error("series has {len} values, need at least {need}")]
    TooShort { len: usize, need: usize },
    #[error("fitted intercept is zero; growth is undefined")]
    ZeroIntercept,
    #[error("series starts at zero; growth is undefined")]
    ZeroBase,
    #[error("non-finite value in series")]
    NonFinite,
    #[error("{forecasts} forecasts against {actuals} actuals")]
    LengthMismatch { forecasts: usize, actuals: usize },
    #[error("no runs to summarize")]
    Empty,
    #[error("economy has no firms")]
    NoFirms,
}
