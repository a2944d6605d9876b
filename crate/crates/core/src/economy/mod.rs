//! Agents and market mechanics: workers, firms, government and the rest of
//! the world, plus the behavioral rules they follow each month.

mod agents;
mod constants;
mod consumption;
mod demography;
mod external;
mod government;
mod investment;
mod labor;
pub mod market;
mod model;
mod production;

pub use agents::{size_class, ExternalSector, Firm, FirmId, Government, Worker, SIZE_CLASSES};
pub use constants::ModelConstants;
pub use consumption::{consume, DemandLedger};
pub use demography::{cull_firms, persistent_unmet, record_unmet, spawn_firms};
pub use external::{external_step, supply_imports};
pub use government::{government_step, sales_tax, unemployment_benefit};
pub use investment::{depreciate, investment_orders};
pub use labor::{desired_headcount, labor_match, MatchOutcome};
pub use market::{logit_probabilities, purchase, Order, Purchase};
pub use model::{allocate_workers, Model};
pub use production::{adjust_price, produce, production_plan, smooth};
