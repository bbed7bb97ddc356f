//! Low- and high-fidelity damped oscillator on a frequency grid, showing a
//! correlation that is linear at high frequency and nonlinear below 30.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::write_rows;
use crate::error::Result;
use crate::fidelity::{linspace, FidelityPair};
use crate::problems::DAMPED_DT;

pub const PEDAGOGY_POINTS: usize = 400;
/// Frequency separating the nonlinear and the nearly linear regime.
pub const PEDAGOGY_SPLIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PedagogyRow {
    pub theta: f64,
    pub q_lf: f64,
    pub q_hf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PedagogyOutput {
    pub rows: Vec<PedagogyRow>,
    /// Pearson correlation of `(Q_LF, Q_HF)` for `theta < 30`.
    pub corr_low: f64,
    /// Same for `theta >= 30`.
    pub corr_high: f64,
    pub files: Vec<PathBuf>,
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn pedagogy_rows() -> Result<Vec<PedagogyRow>> {
    let pair = FidelityPair::damped(DAMPED_DT)?;
    linspace(10.0, 50.0, PEDAGOGY_POINTS)
        .into_par_iter()
        .map(|theta| {
            Ok(PedagogyRow {
                theta,
                q_lf: pair.lf(&[theta])?,
                q_hf: pair.hf(&[theta])?,
            })
        })
        .collect()
}

fn split_correlation(rows: &[PedagogyRow], low: bool) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| (r.theta < PEDAGOGY_SPLIT) == low)
        .map(|r| (r.q_lf, r.q_hf))
        .unzip();
    pearson(&xs, &ys)
}

/// Writes `models.csv` (theta, q_lf, q_hf), `scatter.csv` (q_lf, q_hf) and
/// `residual.csv` (theta, f) into `out`.
pub fn run_pedagogy(out: &Path) -> Result<PedagogyOutput> {
    let rows = pedagogy_rows()?;
    let models = out.join("models.csv");
    let scatter = out.join("scatter.csv");
    let residual = out.join("residual.csv");
    write_rows(
        &models,
        &["theta", "q_lf", "q_hf"],
        rows.iter().map(|r| vec![r.theta, r.q_lf, r.q_hf]),
    )?;
    write_rows(&scatter, &["q_lf", "q_hf"], rows.iter().map(|r| vec![r.q_lf, r.q_hf]))?;
    write_rows(
        &residual,
        &["theta", "f"],
        rows.iter().map(|r| vec![r.theta, r.q_hf - r.q_lf]),
    )?;
    Ok(PedagogyOutput {
        corr_low: split_correlation(&rows, true),
        corr_high: split_correlation(&rows, false),
        rows,
        files: vec![models, scatter, residual],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_of_linear_data_is_one() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((pearson(&xs, &ys) - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg) + 1.0).abs() < 1e-15);
    }

    /// Correlations from a vectorized numpy forward-Euler run at the same step.
    #[test]
    fn low_frequencies_correlate_less() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_pedagogy(dir.path()).unwrap();
        assert!((out.corr_low - 0.9408212035734981).abs() < 1e-8, "{}", out.corr_low);
        assert!((out.corr_high - 0.9873384498996285).abs() < 1e-8, "{}", out.corr_high);
        assert!(out.corr_low < out.corr_high);
    }
}
