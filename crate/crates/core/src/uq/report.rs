use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CostLedger, ErrorReport, McEstimate, ToleranceBudget};
use crate::error::Result;
use crate::fidelity::csv_err;
use crate::io::format_f64;

/// Summary of one tolerance level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub budget: ToleranceBudget,
    /// Keyed by estimator name, e.g. `rmfnn` or `hfm`.
    pub estimates: BTreeMap<String, McEstimate>,
    pub errors: BTreeMap<String, ErrorReport>,
    pub costs: Option<CostLedger>,
    pub seeds: Vec<u64>,
}

/// One line of the cost-versus-tolerance table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub eps_tol: f64,
    pub cpu_time_hfm: f64,
    pub cpu_time_rmfnn_total: f64,
    pub cpu_time_rmfnn_predict: f64,
    pub error: f64,
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(e))?;
    w.write_record([
        "eps_tol",
        "cpu_time_hfm",
        "cpu_time_rmfnn_total",
        "cpu_time_rmfnn_predict",
        "error",
    ])
    .map_err(|e| csv_err(e))?;
    for r in rows {
        w.write_record(
            [
                r.eps_tol,
                r.cpu_time_hfm,
                r.cpu_time_rmfnn_total,
                r.cpu_time_rmfnn_predict,
                r.error,
            ]
            .map(format_f64),
        )
        .map_err(|e| csv_err(e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_convergence_csv(path: &Path) -> Result<Vec<ConvergenceRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_err(e))).collect()
}
