//! Test error of the residual, multi-fidelity and high-fidelity-only networks
//! as the number of high-fidelity samples grows.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::write_rows;
use crate::error::{Error, Result};
use crate::fidelity::{assemble, build_design, csv_err, Dataset, DesignRule, FidelityPair};
use crate::io::{format_f64, write_json};
use crate::net::{save_network, TrainConfig, TrainReport};
use crate::problems::ProblemId;
use crate::surrogate::{
    fit_conjecture_constants, hfnn_build, rmfnn_alt_build, rmfnn_build, train_mfnn, Architecture, ConjectureConstants,
    Method, Stage, Surrogate,
};
use crate::uq::EvalPoints;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub problem: ProblemId,
    pub methods: Vec<Method>,
    pub n_hf: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Neurons per hidden layer.
    pub k: usize,
    /// Layers including the output layer; shortcuts every two layers.
    pub l: usize,
    pub train: TrainConfig,
    pub n_test: usize,
    pub test_seed: u64,
    /// Ratio `N / N_I` for the full residual pipeline; unused by the other methods.
    pub rmfnn_stride: usize,
    /// Resolutions for discretized problems.
    pub h_hf: Option<f64>,
    pub h_lf: Option<f64>,
    pub save_checkpoints: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            problem: ProblemId::PulsedOscillator,
            methods: vec![Method::RmfnnAlt, Method::Mfnn, Method::Hfnn],
            n_hf: vec![250, 500, 1000, 2000],
            seeds: (0..5).collect(),
            k: 7,
            l: 7,
            train: TrainConfig {
                epochs: 2000,
                batch_size: 32,
                ..TrainConfig::default()
            },
            n_test: 100_000,
            test_seed: 12345,
            rmfnn_stride: 4,
            h_hf: None,
            h_lf: None,
            save_checkpoints: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.seeds.is_empty() || self.n_hf.is_empty() {
            return Err(Error::config("methods, seeds and n_hf must be non-empty"));
        }
        if self.methods.contains(&Method::Hfm) {
            return Err(Error::config("hfm is not a trained surrogate and cannot be swept"));
        }
        if self.k == 0 || self.l < 2 {
            return Err(Error::config(format!("network needs K >= 1 and L >= 2, got ({}, {})", self.k, self.l)));
        }
        if self.n_test == 0 {
            return Err(Error::config("n_test must be positive"));
        }
        if self.methods.contains(&Method::Rmfnn) && self.rmfnn_stride < 2 {
            return Err(Error::config("rmfnn_stride must be at least 2"));
        }
        self.pair()?;
        self.train.validate()
    }

    pub fn pair(&self) -> Result<FidelityPair> {
        match (self.problem, self.h_hf, self.h_lf) {
            (ProblemId::DampedOscillator, h, _) => FidelityPair::damped(h.unwrap_or(crate::problems::DAMPED_DT)),
            (ProblemId::PulsedOscillator, _, _) => Ok(FidelityPair::pulsed()),
            (p, Some(h_hf), Some(h_lf)) => FidelityPair::for_problem(p, h_hf, h_lf),
            (p, _, _) => Err(Error::config(format!("{p} needs h_hf and h_lf"))),
        }
    }

    pub fn stage(&self, seed: u64) -> Stage {
        Stage::new(Architecture::resnet(self.k, self.l), self.train.clone().with_seed(seed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TrialKey {
    pub method: Method,
    pub n_hf: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub key: TrialKey,
    /// `None` when training diverged.
    pub mse: Option<f64>,
    pub diverged: bool,
    pub epochs_run: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: Method,
    pub n_hf: usize,
    pub mean_mse: f64,
    pub std_mse: f64,
    pub n_ok: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    /// `hfnn` uses the norm of `Q_HF`, `rmfnn` the norm of the residual.
    pub curve: String,
    pub n_hf: usize,
    pub k: usize,
    pub l: usize,
    pub f_inf: f64,
    pub c1: f64,
    pub c2: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub trials: Vec<TrialResult>,
    pub aggregate: Vec<AggregateRow>,
    pub constants: Option<ConjectureConstants>,
    pub bounds: Vec<BoundRow>,
    pub q_hf_inf: f64,
    pub f_inf: f64,
    pub files: Vec<PathBuf>,
}

struct TestSet {
    points: Vec<Vec<f64>>,
    q_hf: Vec<f64>,
    q_lf: Vec<f64>,
}

fn test_set(pair: &FidelityPair, cfg: &SweepConfig) -> Result<TestSet> {
    let points = EvalPoints::Samples {
        n: cfg.n_test,
        seed: cfg.test_seed,
    }
    .points(&pair.domain);
    let vals = points
        .par_iter()
        .map(|t| Ok((pair.hf(t)?, pair.lf(t)?)))
        .collect::<Result<Vec<_>>>()?;
    let (q_hf, q_lf) = vals.into_iter().unzip();
    Ok(TestSet { points, q_hf, q_lf })
}

fn test_mse(s: &dyn Surrogate, test: &TestSet) -> Result<f64> {
    let se = test
        .points
        .par_chunks(4096)
        .zip(test.q_hf.par_chunks(4096))
        .map(|(p, q)| {
            p.iter()
                .zip(q)
                .map(|(t, q)| Ok((s.predict(t)? - q).powi(2)))
                .sum::<Result<f64>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(se.iter().sum::<f64>() / test.points.len() as f64)
}

fn trial_data(pair: &mut FidelityPair, n_hf: usize, seed: u64) -> Result<Dataset> {
    let plan = build_design(&pair.domain.clone(), &DesignRule::UniformRandom { n: n_hf, stride: 1, seed })?;
    Ok(assemble(pair, &plan)?.0)
}

type Trained = (Box<dyn Surrogate>, Vec<(String, crate::net::Network)>, TrainReport);

fn train_method(cfg: &SweepConfig, pair: &mut FidelityPair, key: TrialKey) -> Result<Trained> {
    let stage = cfg.stage(key.seed);
    match key.method {
        Method::RmfnnAlt => {
            let data = trial_data(pair, key.n_hf, key.seed)?;
            let (c, mut reports) = rmfnn_alt_build(&data, &stage, None, pair.lf_evaluator())?;
            let nets = vec![("resnn".to_string(), c.residual.net.clone())];
            Ok((Box::new(c), nets, reports.remove(0)))
        }
        Method::Mfnn => {
            let data = trial_data(pair, key.n_hf, key.seed)?;
            let (m, r) = train_mfnn(&data, &stage, pair.lf_evaluator())?;
            let nets = vec![("mfnn".to_string(), m.target.net.clone())];
            Ok((Box::new(m), nets, r))
        }
        Method::Hfnn => {
            let data = trial_data(pair, key.n_hf, key.seed)?;
            let (t, r) = hfnn_build(&data, &stage)?;
            let nets = vec![("hfnn".to_string(), t.net.clone())];
            Ok((Box::new(t), nets, r))
        }
        Method::Rmfnn => {
            // N_HF real points among N_HF * stride uniform draws
            let n = key.n_hf * cfg.rmfnn_stride;
            let plan = build_design(
                &pair.domain.clone(),
                &DesignRule::UniformRandom {
                    n,
                    stride: cfg.rmfnn_stride,
                    seed: key.seed,
                },
            )?;
            let b = rmfnn_build(pair, &plan, &stage, &stage)?;
            let mut nets = vec![("dnn".to_string(), b.surrogate.net.clone())];
            if let Some(r) = &b.residual {
                nets.push(("resnn".to_string(), r.net.clone()));
            }
            Ok((Box::new(b.surrogate), nets, b.dnn_report))
        }
        Method::Hfm => Err(Error::config("hfm cannot be trained")),
    }
}

fn run_trial_on(cfg: &SweepConfig, test: &TestSet, key: TrialKey, ckpt: Option<&Path>) -> Result<TrialResult> {
    let mut pair = cfg.pair()?;
    let start = std::time::Instant::now();
    match train_method(cfg, &mut pair, key) {
        Ok((s, nets, report)) => {
            if let Some(dir) = ckpt {
                for (name, net) in &nets {
                    let file = format!("{}_n{}_s{}_{name}.json", key.method, key.n_hf, key.seed);
                    save_network(net, &dir.join(file))?;
                }
            }
            let mse = test_mse(s.as_ref(), test)?;
            Ok(TrialResult {
                key,
                mse: Some(mse),
                diverged: false,
                epochs_run: report.epochs_run,
                wall_time_s: start.elapsed().as_secs_f64(),
            })
        }
        Err(Error::TrainingDiverged { epoch }) => Ok(TrialResult {
            key,
            mse: None,
            diverged: true,
            epochs_run: epoch,
            wall_time_s: start.elapsed().as_secs_f64(),
        }),
        Err(e) => Err(e),
    }
}

/// Train and test one `(method, N_HF, seed)` combination.
pub fn run_trial(cfg: &SweepConfig, key: TrialKey) -> Result<TrialResult> {
    cfg.validate()?;
    let pair = cfg.pair()?;
    let test = test_set(&pair, cfg)?;
    run_trial_on(cfg, &test, key, None)
}

/// Mean and sample standard deviation of the non-diverged trials per `(method, N_HF)`.
pub fn aggregate(trials: &[TrialResult]) -> Vec<AggregateRow> {
    let mut keys: Vec<(Method, usize)> = trials.iter().map(|t| (t.key.method, t.key.n_hf)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(method, n_hf)| {
            let v: Vec<f64> = trials
                .iter()
                .filter(|t| t.key.method == method && t.key.n_hf == n_hf)
                .filter_map(|t| t.mse)
                .collect();
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let std = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            AggregateRow {
                method,
                n_hf,
                mean_mse: mean,
                std_mse: std,
                n_ok: v.len(),
            }
        })
        .collect()
}

fn write_trials(path: &Path, trials: &[TrialResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["method", "n_hf", "seed", "mse", "diverged", "epochs_run"]).map_err(csv_err)?;
    for t in trials {
        w.write_record([
            t.key.method.name().to_string(),
            t.key.n_hf.to_string(),
            t.key.seed.to_string(),
            t.mse.map_or_else(String::new, format_f64),
            t.diverged.to_string(),
            t.epochs_run.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["method", "n_hf", "mean_mse", "std_mse"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.method.name().to_string(),
            r.n_hf.to_string(),
            format_f64(r.mean_mse),
            format_f64(r.std_mse),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn write_bounds(path: &Path, rows: &[BoundRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["curve", "n_hf", "k", "l", "f_inf", "c1", "c2", "bound"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.curve.clone(),
            r.n_hf.to_string(),
            r.k.to_string(),
            r.l.to_string(),
            format_f64(r.f_inf),
            format_f64(r.c1),
            format_f64(r.c2),
            format_f64(r.bound),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every trial of `cfg` and writes `trials.csv`, `aggregate.csv`,
/// `bounds.csv`, `timing.csv` and the resolved `config.json` into `out`.
pub fn run_sweep(cfg: &SweepConfig, out: &Path) -> Result<SweepOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    write_json(&out.join("config.json"), cfg)?;
    let pair = cfg.pair()?;
    let test = test_set(&pair, cfg)?;
    let ckpt = out.join("checkpoints");
    if cfg.save_checkpoints {
        std::fs::create_dir_all(&ckpt)?;
    }
    let mut keys = Vec::new();
    for &method in &cfg.methods {
        for &n_hf in &cfg.n_hf {
            for &seed in &cfg.seeds {
                keys.push(TrialKey { method, n_hf, seed });
            }
        }
    }
    keys.sort();
    keys.dedup();
    let ckpt_dir = cfg.save_checkpoints.then_some(ckpt.as_path());
    let trials = keys
        .par_iter()
        .map(|&k| run_trial_on(cfg, &test, k, ckpt_dir))
        .collect::<Result<Vec<_>>>()?;
    let agg = aggregate(&trials);

    let q_hf_inf = test.q_hf.iter().fold(0.0f64, |m, q| m.max(q.abs()));
    let f_inf = test
        .q_hf
        .iter()
        .zip(&test.q_lf)
        .fold(0.0f64, |m, (h, l)| m.max((h - l).abs()));
    let hfnn_obs: Vec<_> = agg
        .iter()
        .filter(|r| r.method == Method::Hfnn && r.n_ok > 0)
        .map(|r| (cfg.k, cfg.l, q_hf_inf, r.mean_mse))
        .collect();
    let constants = if hfnn_obs.is_empty() {
        None
    } else {
        Some(fit_conjecture_constants(&hfnn_obs)?)
    };
    let mut bounds = Vec::new();
    if let Some(c) = constants {
        for (curve, f) in [("hfnn", q_hf_inf), ("rmfnn", f_inf)] {
            for &n_hf in &cfg.n_hf {
                bounds.push(BoundRow {
                    curve: curve.to_string(),
                    n_hf,
                    k: cfg.k,
                    l: cfg.l,
                    f_inf: f,
                    c1: c.c1,
                    c2: c.c2,
                    bound: c.bound(cfg.k, cfg.l, f)?,
                });
            }
        }
    }

    let files = vec![
        out.join("trials.csv"),
        out.join("aggregate.csv"),
        out.join("bounds.csv"),
        out.join("timing.csv"),
    ];
    write_trials(&files[0], &trials)?;
    write_aggregate(&files[1], &agg)?;
    write_bounds(&files[2], &bounds)?;
    write_rows(
        &files[3],
        &["n_hf", "seed", "wall_time_s"],
        trials
            .iter()
            .map(|t| vec![t.key.n_hf as f64, t.key.seed as f64, t.wall_time_s]),
    )?;
    Ok(SweepOutput {
        trials,
        aggregate: agg,
        constants,
        bounds,
        q_hf_inf,
        f_inf,
        files,
    })
}
