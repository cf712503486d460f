//! The step pipeline, run and ensemble drivers, shocks and data tracking.

mod run;
mod shock;
mod step;
mod tracker;

pub use run::{ensemblerun, mean_ratio, run, run_with_reports, Ensemble, RatioPoint};
pub use shock::{ConsumptionShock, NoShock, Shock};
pub use step::{step, StepReport, INCOME_IDENTITY_TOL, MARKET_TOL, MONEY_TOL};
pub use tracker::{DataTracker, DerivedFn, Extractor, SimulationData, DEFAULT_VARIABLES};
