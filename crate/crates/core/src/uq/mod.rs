//! Monte-Carlo estimation, error metrics, tolerance budgets and cost models.

mod budget;
mod cost;
mod errors;
mod mc;
mod report;
mod stats;

pub use budget::{plan_tolerance, published_levels, PublishedCosts, ToleranceBudget};
pub use cost::{cost_totals, CostInputs, CostLedger, CostTotals};
pub use errors::{error_report, reference_mean, ErrorReport, EvalPoints, ReferenceMean, ReferenceMethod};
pub use mc::{mc_estimate, mc_estimate_serial, McEstimate, MC_SHARDS};
pub use report::{read_convergence_csv, write_convergence_csv, ConvergenceRow, Report};
pub use stats::{failure_probability, slope_fit, SlopeFit, MIN_FAILURE_TRIALS};
