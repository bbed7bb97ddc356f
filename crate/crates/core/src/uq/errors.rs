use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mc::mc_estimate;
use crate::error::{Error, Result};
use crate::problems::Domain;
use crate::rng::{self, STREAM_TEST_POINTS};
use crate::surrogate::Surrogate;

/// Where a surrogate is compared with the exact quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EvalPoints {
    /// Cell midpoints of a tensor grid with `per_dim` cells per axis.
    Grid { per_dim: usize },
    /// `n` seeded uniform draws.
    Samples { n: usize, seed: u64 },
}

impl EvalPoints {
    /// Grid for `d <= 2`, seeded samples otherwise, with about `n` points.
    pub fn default_for(dim: usize, n: usize, seed: u64) -> Self {
        if dim <= 2 {
            let per_dim = (n as f64).powf(1.0 / dim.max(1) as f64).round().max(1.0) as usize;
            EvalPoints::Grid { per_dim }
        } else {
            EvalPoints::Samples { n, seed }
        }
    }

    pub fn count(&self, dim: usize) -> usize {
        match *self {
            EvalPoints::Grid { per_dim } => per_dim.pow(dim as u32),
            EvalPoints::Samples { n, .. } => n,
        }
    }

    pub fn points(&self, domain: &Domain) -> Vec<Vec<f64>> {
        match *self {
            EvalPoints::Grid { per_dim } => domain.midpoints(per_dim),
            EvalPoints::Samples { n, seed } => {
                let mut r = rng::stream(seed, STREAM_TEST_POINTS);
                (0..n)
                    .map(|_| {
                        (0..domain.dim())
                            .map(|k| domain.lower[k] + (domain.upper[k] - domain.lower[k]) * r.random::<f64>())
                            .collect()
                    })
                    .collect()
            }
        }
    }
}

/// `E[Q]` of the exact quantity, with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMean {
    pub value: f64,
    /// Zero for quadrature.
    pub stderr: f64,
    pub n: u64,
    pub method: ReferenceMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMethod {
    Midpoint,
    MonteCarlo,
}

const CHUNK: usize = 4096;

/// Mean of `f` over `points`, summed in fixed-size chunks so the result is thread-count independent.
fn ordered_mean(points: &[Vec<f64>], f: impl Fn(&[f64]) -> Result<f64> + Sync) -> Result<f64> {
    let partial = points
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(|p| f(p)).sum::<Result<f64>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(partial.iter().sum::<f64>() / points.len() as f64)
}

/// Midpoint rule on roughly `n` cells for `d <= 2`, seeded Monte Carlo otherwise.
pub fn reference_mean<S: Surrogate + ?Sized>(exact: &S, domain: &Domain, n: u64, seed: u64) -> Result<ReferenceMean> {
    domain.validate()?;
    if n == 0 {
        return Err(Error::arg("reference needs at least one point"));
    }
    if domain.dim() <= 2 {
        let per_dim = (n as f64).powf(1.0 / domain.dim() as f64).round().max(1.0) as usize;
        let pts = domain.midpoints(per_dim);
        Ok(ReferenceMean {
            value: ordered_mean(&pts, |t| exact.predict(t))?,
            stderr: 0.0,
            n: pts.len() as u64,
            method: ReferenceMethod::Midpoint,
        })
    } else {
        let e = mc_estimate(exact, domain, n.max(2), seed)?;
        Ok(ReferenceMean {
            value: e.value,
            stderr: e.stderr,
            n: e.n_theta,
            method: ReferenceMethod::MonteCarlo,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Mean squared surrogate error over the evaluation points.
    pub mse: f64,
    pub n_eval: usize,
    /// Estimate of `E[Q]` the absolute error refers to.
    pub estimate: Option<f64>,
    pub reference: Option<ReferenceMean>,
    pub abs: Option<f64>,
    /// Omitted when `E[Q] = 0`.
    pub rel: Option<f64>,
    pub rel_undefined: bool,
}

impl ErrorReport {
    /// Attach `|E[Q] - estimate|` and its relative version.
    pub fn with_estimate(mut self, estimate: f64, reference: ReferenceMean) -> Self {
        let abs = (reference.value - estimate).abs();
        self.estimate = Some(estimate);
        self.reference = Some(reference);
        self.abs = Some(abs);
        if reference.value == 0.0 {
            self.rel = None;
            self.rel_undefined = true;
        } else {
            self.rel = Some(abs / reference.value.abs());
            self.rel_undefined = false;
        }
        self
    }
}

/// Mean squared error of `surrogate` against `exact` over `points`.
///
/// With a reference mean the absolute and relative errors use the surrogate's
/// own mean over the same points as the estimate.
pub fn error_report<S, E>(
    surrogate: &S,
    exact: &E,
    domain: &Domain,
    points: &EvalPoints,
    reference: Option<ReferenceMean>,
) -> Result<ErrorReport>
where
    S: Surrogate + ?Sized,
    E: Surrogate + ?Sized,
{
    domain.validate()?;
    let pts = points.points(domain);
    if pts.is_empty() {
        return Err(Error::arg("no evaluation points"));
    }
    let pairs = pts
        .par_chunks(CHUNK)
        .map(|c| {
            let (mut se, mut s) = (0.0, 0.0);
            for p in c {
                let q = surrogate.predict(p)?;
                let d = q - exact.predict(p)?;
                se += d * d;
                s += q;
            }
            Ok((se, s))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let n = pts.len() as f64;
    let mse = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let report = ErrorReport {
        mse,
        n_eval: pts.len(),
        estimate: None,
        reference: None,
        abs: None,
        rel: None,
        rel_undefined: false,
    };
    Ok(match reference {
        Some(r) => report.with_estimate(mean, r),
        None => report,
    })
}
