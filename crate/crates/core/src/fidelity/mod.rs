//! Low/high-fidelity pairs, experimental designs and training datasets.

mod dataset;
mod design;
mod pair;

pub use dataset::{assemble, AssemblyCosts, Dataset, Provenance, Record};
pub(crate) use dataset::csv_err;
pub use design::{build_design, linspace, DesignPlan, DesignRule};
pub use pair::{residual_bound, residual_ratio, Discretization, Evaluator, FidelityPair, ResidualRatio};
