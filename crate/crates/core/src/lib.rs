//! Agent-based input-output economy: table ingestion, agent rules, the
//! monthly engine, calibration, shock timelines and ensemble forecasting.

pub mod calibration;
pub mod economy;
pub mod engine;
pub mod forecast;
pub mod io_table;
pub mod shocks;

pub use economy::{Firm, FirmId, Model, ModelConstants, Worker};
pub use engine::{step_month, EconomyState, EngineError, MonthReport, Phase};
pub use forecast::{EnsembleResult, SeedRun};
pub use io_table::{CountryParams, RepairPolicy, RepairReport, SocialAccountingMatrix};
pub use shocks::{MonthShock, PandemicTimeline};
