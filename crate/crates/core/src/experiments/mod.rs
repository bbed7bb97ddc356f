//! Experiment drivers behind the command-line subcommands.

mod pedagogy;
mod sweep;
mod tolerance;

use std::path::Path;

use crate::error::Result;
use crate::fidelity::csv_err;
use crate::io::format_f64;

pub use pedagogy::{pearson, pedagogy_rows, run_pedagogy, PedagogyOutput, PedagogyRow, PEDAGOGY_POINTS, PEDAGOGY_SPLIT};
pub use sweep::{
    aggregate, run_sweep, run_trial, AggregateRow, BoundRow, SweepConfig, SweepOutput, TrialKey, TrialResult,
};
pub use tolerance::{
    run_tolerance_level, run_tolerance_study, time_median, LevelOutcome, ToleranceStudyConfig, ToleranceStudyOutput,
};

/// Numeric CSV with a header, floats at full precision.
pub fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.into_iter().map(format_f64)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
