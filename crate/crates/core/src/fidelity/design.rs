use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Domain;
use crate::rng;

/// How the `N` design points are placed and split into `Theta_I` (high-fidelity)
/// and `Theta_II` (low-fidelity only).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DesignRule {
    /// Tensor grid with `counts[k]` uniformly spaced nodes (endpoints included)
    /// along axis `k`. A node joins `Theta_I` when its index along every axis
    /// is a multiple of that axis' stride.
    TensorGridStride { counts: Vec<usize>, strides: Vec<usize> },
    /// `n` i.i.d. uniform draws; after a seeded shuffle every `stride`-th point
    /// joins `Theta_I`. `stride = 1` puts every point in `Theta_I`.
    UniformRandom { n: usize, stride: usize, seed: u64 },
}

impl DesignRule {
    /// One-dimensional grid of `n` nodes with every `stride`-th in `Theta_I`.
    pub fn grid_stride(n: usize, stride: usize) -> Self {
        DesignRule::TensorGridStride {
            counts: vec![n],
            strides: vec![stride],
        }
    }

    pub fn total(&self) -> usize {
        match self {
            DesignRule::TensorGridStride { counts, .. } => counts.iter().product(),
            DesignRule::UniformRandom { n, .. } => *n,
        }
    }

    /// `N_I` implied by the rule.
    pub fn n_i(&self) -> usize {
        match self {
            DesignRule::TensorGridStride { counts, strides } => counts
                .iter()
                .zip(strides)
                .map(|(c, s)| if *s == 0 { 0 } else { c.div_ceil(*s) })
                .product(),
            DesignRule::UniformRandom { n, stride, .. } => {
                if *stride == 0 {
                    0
                } else {
                    n.div_ceil(*stride)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPlan {
    pub theta_i: Vec<Vec<f64>>,
    pub theta_ii: Vec<Vec<f64>>,
    pub rule: DesignRule,
}

impl DesignPlan {
    pub fn n(&self) -> usize {
        self.theta_i.len() + self.theta_ii.len()
    }

    pub fn n_i(&self) -> usize {
        self.theta_i.len()
    }

    pub fn n_ii(&self) -> usize {
        self.theta_ii.len()
    }

    /// `r = N_I / N`.
    pub fn ratio(&self) -> f64 {
        self.n_i() as f64 / self.n() as f64
    }
}

/// Uniform nodes `lo + i (hi - lo) / (n - 1)`, `i = 0..n`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + i as f64 * (hi - lo) / (n - 1) as f64).collect(),
    }
}

pub fn build_design(domain: &Domain, rule: &DesignRule) -> Result<DesignPlan> {
    domain.validate()?;
    let (theta_i, theta_ii) = match rule {
        DesignRule::TensorGridStride { counts, strides } => {
            if counts.len() != domain.dim() || strides.len() != domain.dim() {
                return Err(Error::DimensionMismatch {
                    expected: domain.dim(),
                    actual: counts.len().max(strides.len()),
                });
            }
            if counts.iter().product::<usize>() < 2 {
                return Err(Error::arg("a design needs at least 2 points"));
            }
            if counts.contains(&0) || strides.contains(&0) {
                return Err(Error::arg("grid counts and strides must be positive"));
            }
            let axes: Vec<Vec<f64>> = (0..domain.dim())
                .map(|k| linspace(domain.lower[k], domain.upper[k], counts[k]))
                .collect();
            let total: usize = counts.iter().product();
            let mut first = Vec::new();
            let mut second = Vec::new();
            let mut idx = vec![0usize; counts.len()];
            for _ in 0..total {
                let theta: Vec<f64> = idx.iter().enumerate().map(|(k, &i)| axes[k][i]).collect();
                if idx.iter().zip(strides).all(|(i, s)| i % s == 0) {
                    first.push(theta);
                } else {
                    second.push(theta);
                }
                // row-major: last axis fastest
                for k in (0..idx.len()).rev() {
                    idx[k] += 1;
                    if idx[k] < counts[k] {
                        break;
                    }
                    idx[k] = 0;
                }
            }
            if second.is_empty() {
                return Err(Error::arg(format!(
                    "strides {strides:?} leave Theta_II empty on a {counts:?} grid"
                )));
            }
            (first, second)
        }
        DesignRule::UniformRandom { n, stride, seed } => {
            if *n < 1 || *stride == 0 {
                return Err(Error::arg("random design needs n >= 1 and stride >= 1"));
            }
            if *stride >= 2 && *n < 2 {
                return Err(Error::arg("a split design needs at least 2 points"));
            }
            let mut rng = rng::stream(*seed, rng::STREAM_DESIGN);
            let mut pts: Vec<Vec<f64>> = (0..*n)
                .map(|_| {
                    (0..domain.dim())
                        .map(|k| domain.lower[k] + rng.random::<f64>() * (domain.upper[k] - domain.lower[k]))
                        .collect()
                })
                .collect();
            pts.shuffle(&mut rng);
            let mut first = Vec::new();
            let mut second = Vec::new();
            for (p, theta) in pts.into_iter().enumerate() {
                if p % stride == 0 {
                    first.push(theta);
                } else {
                    second.push(theta);
                }
            }
            (first, second)
        }
    };
    Ok(DesignPlan {
        theta_i,
        theta_ii,
        rule: rule.clone(),
    })
}
