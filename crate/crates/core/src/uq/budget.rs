//! Tolerance budgets: how many samples, which resolutions and which networks
//! achieve a requested accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::DesignRule;
use crate::net::TrainConfig;
use crate::problems::ProblemId;
use crate::surrogate::{Architecture, Stage};

/// Costs and accuracy reported alongside a published row; hardware specific.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedCosts {
    pub w_hf: f64,
    pub w_lf: f64,
    pub w_t1: f64,
    pub w_t2: f64,
    /// Per-prediction time of the residual network.
    pub w_p1: f64,
    /// Per-prediction time of the deep network.
    pub w_p2: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceBudget {
    pub problem: ProblemId,
    pub eps_tol: f64,
    pub n_theta: u64,
    pub h_hf: f64,
    pub h_lf: f64,
    pub n: usize,
    pub n_i: usize,
    pub design: DesignRule,
    pub resnn: Stage,
    pub dnn: Stage,
    /// Cost exponent of one high-fidelity solve, `W_HF ~ h^-gamma`.
    pub gamma: f64,
    pub order_q: f64,
    /// `N ~ eps^-p`.
    pub p: f64,
    /// Derived from the scalings rather than copied from a table.
    pub interpolated: bool,
    pub anchor_eps: f64,
    pub published: Option<PublishedCosts>,
}

impl ToleranceBudget {
    pub fn r(&self) -> f64 {
        self.n_i as f64 / self.n as f64
    }

    pub fn s(&self) -> f64 {
        self.h_lf / self.h_hf
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_tol > 0.0 && self.eps_tol < 0.5) {
            return Err(Error::arg(format!("tolerance must lie in (0, 0.5), got {}", self.eps_tol)));
        }
        if !(self.h_hf < self.h_lf) {
            return Err(Error::config(format!(
                "high-fidelity step {} must be finer than low-fidelity step {}",
                self.h_hf, self.h_lf
            )));
        }
        if !(self.n_i < self.n) {
            return Err(Error::config(format!("N_I = {} must be below N = {}", self.n_i, self.n)));
        }
        if self.design.total() != self.n || self.design.n_i() != self.n_i {
            return Err(Error::config("design rule disagrees with N and N_I"));
        }
        self.resnn.train.validate()?;
        self.dnn.train.validate()
    }
}

struct Row {
    eps: f64,
    n_theta: u64,
    h_hf: f64,
    h_lf: f64,
    n_i: usize,
    n: usize,
    counts: &'static [usize],
    resnn: (usize, usize),
    dnn: (usize, usize),
    costs: PublishedCosts,
}

struct Table {
    rows: [Row; 3],
    gamma: f64,
    q: f64,
    p: f64,
    strides: &'static [usize],
    resnn: (usize, usize),
    dnn: (usize, usize),
    lr: f64,
}

fn costs(w_hf: f64, w_lf: f64, w_t1: f64, w_t2: f64, w_p1: f64, w_p2: f64, mse: f64) -> PublishedCosts {
    PublishedCosts {
        w_hf,
        w_lf,
        w_t1,
        w_t2,
        w_p1,
        w_p2,
        mse,
    }
}

fn ivp_table() -> Table {
    Table {
        rows: [
            Row {
                eps: 1e-2,
                n_theta: 135_000,
                h_hf: 0.1,
                h_lf: 0.5,
                n_i: 25,
                n: 241,
                counts: &[241],
                resnn: (100, 10),
                dnn: (400, 40),
                costs: costs(2.24e-4, 4.36e-5, 9.72, 35.24, 2.98e-5, 4.38e-5, 2.25e-2),
            },
            Row {
                eps: 1e-3,
                n_theta: 13_500_000,
                h_hf: 0.025,
                h_lf: 0.25,
                n_i: 81,
                n: 801,
                counts: &[801],
                resnn: (1500, 30),
                dnn: (8000, 80),
                costs: costs(7.21e-4, 1.04e-4, 49.08, 927.77, 2.98e-5, 4.38e-5, 1.50e-3),
            },
            Row {
                eps: 1e-4,
                n_theta: 1_350_000_000,
                h_hf: 0.01,
                h_lf: 0.1,
                n_i: 321,
                n: 3201,
                counts: &[3201],
                resnn: (5000, 50),
                dnn: (20000, 50),
                costs: costs(2.20e-3, 2.24e-4, 257.86, 13708.08, 2.98e-5, 4.38e-5, 1.40e-4),
            },
        ],
        gamma: 1.0,
        q: 2.0,
        p: 0.5,
        strides: &[10],
        resnn: (2, 10),
        dnn: (4, 20),
        lr: 1e-3,
    }
}

fn wave_table() -> Table {
    Table {
        rows: [
            Row {
                eps: 1e-1,
                n_theta: 150,
                h_hf: 1.0 / 32.0,
                h_lf: 1.0 / 20.0,
                n_i: 324,
                n: 3498,
                counts: &[33, 106],
                resnn: (100, 50),
                dnn: (200, 50),
                costs: costs(0.67, 0.21, 15.16, 284.54, 5.13e-5, 1.34e-4, 1.42e-2),
            },
            Row {
                eps: 1e-2,
                n_theta: 15_000,
                h_hf: 1.0 / 128.0,
                h_lf: 1.0 / 32.0,
                n_i: 451,
                n: 4961,
                counts: &[41, 121],
                resnn: (200, 50),
                dnn: (500, 50),
                costs: costs(29.75, 0.67, 47.51, 1301.65, 5.13e-5, 1.34e-4, 0.69e-3),
            },
            Row {
                eps: 1e-3,
                n_theta: 1_500_000,
                h_hf: 1.0 / 320.0,
                h_lf: 1.0 / 40.0,
                n_i: 714,
                n: 8003,
                counts: &[53, 151],
                resnn: (1000, 50),
                dnn: (4000, 50),
                costs: costs(708.21, 1.59, 304.30, 14825.28, 5.13e-5, 1.34e-4, 0.78e-4),
            },
        ],
        gamma: 3.0,
        q: 2.0,
        p: 0.2,
        strides: &[4, 3],
        resnn: (2, 20),
        dnn: (4, 30),
        lr: 5e-3,
    }
}

fn table(problem: ProblemId) -> Result<Table> {
    match problem {
        ProblemId::ParametricIvp => Ok(ivp_table()),
        ProblemId::WaveIbvp => Ok(wave_table()),
        other => Err(Error::Unsupported(format!("no tolerance table for {other}"))),
    }
}

/// Published tolerance levels of `problem`.
pub fn published_levels(problem: ProblemId) -> Result<Vec<f64>> {
    Ok(table(problem)?.rows.iter().map(|r| r.eps).collect())
}

fn stage(arch: (usize, usize), epochs_batch: (usize, usize), lr: f64, n_samples: usize) -> Stage {
    let (epochs, batch) = epochs_batch;
    let mut cfg = TrainConfig {
        tikhonov_lambda: 0.0,
        ..TrainConfig::new(epochs, batch, lr)
    };
    let n_train = crate::net::split_sizes(n_samples, cfg.validation_fraction).map_or(1, |s| s.0);
    cfg.batch_size = cfg.batch_size.min(n_train.max(1));
    Stage::new(Architecture::dense(arch.0, arch.1), cfg)
}

/// Largest step not above `h` that divides the time interval `[0, 100]`.
fn snap_ivp(h: f64) -> f64 {
    let n = (crate::problems::IVP_T / h - 1e-9).ceil().max(1.0);
    crate::problems::IVP_T / n
}

/// Largest grid length not above `h` with a node count divisible by 4 on `[-1, 1]`,
/// so the point of interest stays a grid node.
fn snap_wave(h: f64) -> f64 {
    let n = ((2.0 / h - 1e-9).ceil() as usize).max(4);
    2.0 / n.next_multiple_of(4) as f64
}

/// Budget achieving tolerance `eps_tol` on `problem`.
///
/// Published levels are returned verbatim. Other tolerances need
/// `allow_interpolation` and are scaled from the nearest published level in
/// `log(eps)`: `N_theta ~ eps^-2`, `h_HF ~ eps^(1/q)` at fixed `s`, `N ~ eps^-p`.
pub fn plan_tolerance(problem: ProblemId, eps_tol: f64, allow_interpolation: bool) -> Result<ToleranceBudget> {
    if !(eps_tol > 0.0 && eps_tol < 0.5) {
        return Err(Error::arg(format!("tolerance must lie in (0, 0.5), got {eps_tol}")));
    }
    let t = table(problem)?;
    let row = t
        .rows
        .iter()
        .min_by(|a, b| {
            let da = (a.eps.ln() - eps_tol.ln()).abs();
            let db = (b.eps.ln() - eps_tol.ln()).abs();
            da.total_cmp(&db)
        })
        .expect("three rows");
    let exact = ((row.eps - eps_tol) / row.eps).abs() < 1e-9;
    if exact {
        let design = DesignRule::TensorGridStride {
            counts: row.counts.to_vec(),
            strides: t.strides.to_vec(),
        };
        let b = ToleranceBudget {
            problem,
            eps_tol: row.eps,
            n_theta: row.n_theta,
            h_hf: row.h_hf,
            h_lf: row.h_lf,
            n: row.n,
            n_i: row.n_i,
            design,
            resnn: stage(t.resnn, row.resnn, t.lr, row.n_i),
            dnn: stage(t.dnn, row.dnn, t.lr, row.n),
            gamma: t.gamma,
            order_q: t.q,
            p: t.p,
            interpolated: false,
            anchor_eps: row.eps,
            published: Some(row.costs),
        };
        b.validate()?;
        return Ok(b);
    }
    if !allow_interpolation {
        return Err(Error::arg(format!(
            "{eps_tol} is not a published tolerance of {problem} (levels {:?}); enable interpolation",
            t.rows.iter().map(|r| r.eps).collect::<Vec<_>>()
        )));
    }
    let factor = row.eps / eps_tol;
    let n_theta = (row.n_theta as f64 * factor * factor).round().max(2.0) as u64;
    let s = row.h_lf / row.h_hf;
    let h = row.h_hf * factor.powf(-1.0 / t.q);
    let counts: Vec<usize> = if problem == ProblemId::ParametricIvp {
        let n_i = ((row.n_i as f64 * factor.powf(t.p)).round() as usize).max(2);
        vec![(n_i - 1) * t.strides[0] + 1]
    } else {
        let g = factor.powf(t.p / row.counts.len() as f64);
        row.counts
            .iter()
            .map(|&c| ((c as f64 * g).round() as usize).max(2))
            .collect()
    };
    let (h_hf, h_lf) = match problem {
        ProblemId::ParametricIvp => (snap_ivp(h), snap_ivp(s * h)),
        _ => (snap_wave(h), snap_wave(s * h)),
    };
    let design = DesignRule::TensorGridStride {
        counts,
        strides: t.strides.to_vec(),
    };
    let (n, n_i) = (design.total(), design.n_i());
    let b = ToleranceBudget {
        problem,
        eps_tol,
        n_theta,
        h_hf,
        h_lf,
        n,
        n_i,
        design,
        resnn: stage(t.resnn, row.resnn, t.lr, n_i),
        dnn: stage(t.dnn, row.dnn, t.lr, n),
        gamma: t.gamma,
        order_q: t.q,
        p: t.p,
        interpolated: true,
        anchor_eps: row.eps,
        published: None,
    };
    b.validate()?;
    Ok(b)
}
