//! Monthly tick orchestration, accounting close, price indices and the
//! per-month report.

mod flows;
pub mod indices;
mod report;
mod state;
mod step;

#[cfg(test)]
pub(crate) mod test_support;

pub use flows::MonthFlows;
pub use indices::{compute_cpi, compute_real_gdp, cpi_index};
pub use report::{write_reports_csv, MonthReport, SCALAR_COLUMNS};
pub use state::{EconomyState, Phase};
pub use step::{close_accounts, step_month, EngineError, RESIDUAL_TOLERANCE};
