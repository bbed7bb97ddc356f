//! Monte-Carlo cost and accuracy of the residual surrogate against direct
//! high-fidelity sampling over a range of tolerances.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::write_rows;
use crate::error::{Error, Result};
use crate::fidelity::{assemble, build_design, AssemblyCosts, Dataset, FidelityPair};
use crate::io::write_json;
use crate::problems::{Domain, ProblemId};
use crate::rng::child_seed;
use crate::surrogate::{rmfnn_from_dataset, Stage, TargetSurrogate};
use crate::uq::{
    cost_totals, error_report, failure_probability, mc_estimate, mc_estimate_serial, plan_tolerance, reference_mean,
    slope_fit, write_convergence_csv, ConvergenceRow, CostInputs, CostLedger, ErrorReport, EvalPoints, McEstimate,
    ReferenceMean, Report, ToleranceBudget, MIN_FAILURE_TRIALS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceStudyConfig {
    pub problem: ProblemId,
    pub tolerances: Vec<f64>,
    /// Independent surrogate builds per tolerance.
    pub trials: usize,
    pub seed: u64,
    /// Run direct high-fidelity Monte Carlo when it fits `hfm_budget_s`;
    /// otherwise its time is projected as `N_theta * W_HF`.
    pub run_hfm: bool,
    pub hfm_budget_s: f64,
    pub timing_repeats: usize,
    /// Points for the reference mean of the exact quantity.
    pub reference_points: u64,
    /// Points for the surrogate mean squared error.
    pub mse_points: usize,
    /// Points used to time one model evaluation.
    pub cost_samples: usize,
    /// Allow the finest published tolerance, which takes days of CPU.
    pub full_scale: bool,
}

impl Default for ToleranceStudyConfig {
    fn default() -> Self {
        Self {
            problem: ProblemId::ParametricIvp,
            tolerances: vec![1e-1, 10f64.powf(-1.5), 1e-2],
            trials: MIN_FAILURE_TRIALS,
            seed: 0,
            run_hfm: true,
            hfm_budget_s: 300.0,
            timing_repeats: 3,
            reference_points: 1_000_000,
            mse_points: 1_000_000,
            cost_samples: 50,
            full_scale: false,
        }
    }
}

impl ToleranceStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tolerances.is_empty() {
            return Err(Error::config("tolerances must be non-empty"));
        }
        if self.trials == 0 || self.timing_repeats == 0 || self.cost_samples == 0 {
            return Err(Error::config("trials, timing_repeats and cost_samples must be positive"));
        }
        let finest = crate::uq::published_levels(self.problem)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        for &eps in &self.tolerances {
            if eps <= finest * (1.0 + 1e-9) && !self.full_scale {
                return Err(Error::config(format!(
                    "tolerance {eps} needs days of CPU for {}; pass full_scale to run it",
                    self.problem
                )));
            }
        }
        Ok(())
    }
}

/// Median wall time of `repeats` runs of `f`, with the result of the last run.
pub fn time_median<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let v = f()?;
        times.push(start.elapsed().as_secs_f64());
        last = Some(v);
    }
    times.sort_by(f64::total_cmp);
    let n = times.len();
    let med = if n % 2 == 1 {
        times[n / 2]
    } else {
        0.5 * (times[n / 2 - 1] + times[n / 2])
    };
    Ok((med, last.expect("at least one run")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub estimate: McEstimate,
    /// Relative error for the ODE, absolute for the wave problem.
    pub error: f64,
    pub failed: bool,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelOutcome {
    pub budget: ToleranceBudget,
    pub reference: ReferenceMean,
    pub trials: Vec<TrialOutcome>,
    pub failure_probability: Option<f64>,
    pub w_hf: f64,
    pub w_lf: f64,
    pub w_dnn: f64,
    pub t1: f64,
    pub t2: f64,
    pub predict_time_s: f64,
    pub hfm_time_s: f64,
    pub hfm_measured: bool,
    pub hfm_estimate: Option<McEstimate>,
    pub ledger: CostLedger,
    pub assembly: AssemblyCosts,
    pub report: Report,
}

impl LevelOutcome {
    pub fn convergence_row(&self) -> ConvergenceRow {
        let mut errs: Vec<f64> = self.trials.iter().map(|t| t.error).collect();
        errs.sort_by(f64::total_cmp);
        ConvergenceRow {
            eps_tol: self.budget.eps_tol,
            cpu_time_hfm: self.hfm_time_s,
            cpu_time_rmfnn_total: self.ledger.with_training.w_rmfnn,
            cpu_time_rmfnn_predict: self.predict_time_s,
            error: errs[errs.len() / 2],
        }
    }
}

fn uses_relative_error(problem: ProblemId) -> bool {
    problem != ProblemId::WaveIbvp
}

fn level_error(problem: ProblemId, reference: &ReferenceMean, value: f64) -> f64 {
    let abs = (reference.value - value).abs();
    if uses_relative_error(problem) && reference.value != 0.0 {
        abs / reference.value.abs()
    } else {
        abs
    }
}

fn exact_of(problem: ProblemId) -> impl Fn(&[f64]) -> Result<f64> + Send + Sync {
    move |t: &[f64]| problem.reference(t)
}

fn per_call(pair: &FidelityPair, points: &[Vec<f64>], repeats: usize, hf: bool) -> Result<f64> {
    let (t, _) = time_median(repeats, || {
        for p in points {
            std::hint::black_box(if hf { pair.hf(p)? } else { pair.lf(p)? });
        }
        Ok(())
    })?;
    Ok(t / points.len() as f64)
}

struct Built {
    surrogate: TargetSurrogate,
    t1: f64,
    t2: f64,
}

fn build_trial(data: &Dataset, budget: &ToleranceBudget, seed: u64) -> Result<Built> {
    let resnn = Stage::new(budget.resnn.arch.clone(), budget.resnn.train.clone().with_seed(seed));
    let dnn = Stage::new(budget.dnn.arch.clone(), budget.dnn.train.clone().with_seed(seed));
    let b = rmfnn_from_dataset(data, AssemblyCosts::default(), &resnn, &dnn)?;
    Ok(Built {
        t1: b.resnn_report.as_ref().map_or(0.0, |r| r.wall_time_s),
        t2: b.dnn_report.wall_time_s,
        surrogate: b.surrogate,
    })
}

fn mse_points(domain: &Domain, n: usize, seed: u64) -> EvalPoints {
    EvalPoints::default_for(domain.dim(), n, seed)
}

/// One tolerance level: assemble once, build `cfg.trials` surrogates, estimate and time.
pub fn run_tolerance_level(cfg: &ToleranceStudyConfig, eps: f64) -> Result<LevelOutcome> {
    let budget = plan_tolerance(cfg.problem, eps, true)?;
    let problem = cfg.problem;
    let mut pair = FidelityPair::for_problem(problem, budget.h_hf, budget.h_lf)?;
    let domain = pair.domain.clone();
    let exact = exact_of(problem);
    let reference = reference_mean(&exact, &domain, cfg.reference_points, child_seed(cfg.seed, u64::MAX))?;

    let plan = build_design(&domain, &budget.design)?;
    let (data, assembly) = assemble(&mut pair, &plan)?;

    let probe = EvalPoints::Samples {
        n: cfg.cost_samples,
        seed: child_seed(cfg.seed, 7),
    }
    .points(&domain);
    let w_hf = per_call(&pair, &probe, cfg.timing_repeats, true)?;
    let w_lf = per_call(&pair, &probe, cfg.timing_repeats, false)?;

    let seeds: Vec<u64> = (0..cfg.trials).map(|t| child_seed(cfg.seed, t as u64)).collect();
    // the first build is timed alone so the pool does not distort it
    let first = build_trial(&data, &budget, seeds[0])?;
    let (predict_time_s, _) = time_median(cfg.timing_repeats, || {
        mc_estimate_serial(&first.surrogate, &domain, budget.n_theta, seeds[0])
    })?;
    let rest = seeds[1..]
        .par_iter()
        .map(|&s| build_trial(&data, &budget, s).map(|b| b.surrogate))
        .collect::<Result<Vec<_>>>()?;
    let surrogates: Vec<&TargetSurrogate> = std::iter::once(&first.surrogate).chain(rest.iter()).collect();

    let points = mse_points(&domain, cfg.mse_points, child_seed(cfg.seed, 8));
    let mut trials = Vec::with_capacity(cfg.trials);
    let mut first_errors: Option<ErrorReport> = None;
    for (i, (s, &seed)) in surrogates.iter().zip(&seeds).enumerate() {
        let estimate = mc_estimate(*s, &domain, budget.n_theta, seed)?;
        let rep = error_report(*s, &exact, &domain, &points, None)?;
        let error = level_error(problem, &reference, estimate.value);
        if i == 0 {
            first_errors = Some(rep.clone().with_estimate(estimate.value, reference));
        }
        trials.push(TrialOutcome {
            trial: i,
            seed,
            estimate,
            error,
            failed: error > eps,
            mse: rep.mse,
        });
    }

    let projected = budget.n_theta as f64 * w_hf;
    let (hfm_time_s, hfm_measured, hfm_estimate) = if cfg.run_hfm && projected <= cfg.hfm_budget_s {
        let hf = pair.hf_evaluator();
        let f = move |t: &[f64]| hf(t);
        let repeats = if projected * cfg.timing_repeats as f64 <= cfg.hfm_budget_s {
            cfg.timing_repeats
        } else {
            1
        };
        let (t, est) = time_median(repeats, || mc_estimate_serial(&f, &domain, budget.n_theta, seeds[0]))?;
        (t, true, Some(est))
    } else {
        (projected, false, None)
    };

    let w_dnn = predict_time_s / budget.n_theta as f64;
    let ledger = cost_totals(&CostInputs {
        w_hf,
        w_lf,
        w_dnn,
        w_resnn: 0.0,
        w_t1: first.t1,
        w_t2: first.t2,
        n_i: budget.n_i as u64,
        n: budget.n as u64,
        n_theta: budget.n_theta,
    })?;
    let failure = if trials.len() >= MIN_FAILURE_TRIALS {
        Some(failure_probability(
            &trials.iter().map(|t| (t.error, eps)).collect::<Vec<_>>(),
        )?)
    } else {
        None
    };

    let mut estimates = BTreeMap::new();
    estimates.insert("rmfnn".to_string(), trials[0].estimate);
    if let Some(h) = hfm_estimate {
        estimates.insert("hfm".to_string(), h);
    }
    let mut errors = BTreeMap::new();
    errors.insert("rmfnn".to_string(), first_errors.expect("at least one trial"));
    if let Some(h) = hfm_estimate {
        let hrep = ErrorReport {
            mse: 0.0,
            n_eval: 0,
            estimate: None,
            reference: None,
            abs: None,
            rel: None,
            rel_undefined: false,
        };
        errors.insert("hfm".to_string(), hrep.with_estimate(h.value, reference));
    }
    let report = Report {
        budget: budget.clone(),
        estimates,
        errors,
        costs: Some(ledger),
        seeds: seeds.clone(),
    };
    Ok(LevelOutcome {
        budget,
        reference,
        trials,
        failure_probability: failure,
        w_hf,
        w_lf,
        w_dnn,
        t1: first.t1,
        t2: first.t2,
        predict_time_s,
        hfm_time_s,
        hfm_measured,
        hfm_estimate,
        ledger,
        assembly,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceStudyOutput {
    pub levels: Vec<LevelOutcome>,
    pub rows: Vec<ConvergenceRow>,
    /// Log-log slopes against the tolerance, when at least three levels ran.
    pub hfm_slope: Option<f64>,
    pub predict_slope: Option<f64>,
    pub files: Vec<PathBuf>,
}

/// Writes `convergence.csv`, `scatter.csv`, `summary.json` and one `report_<i>.json` per level.
pub fn run_tolerance_study(cfg: &ToleranceStudyConfig, out: &Path) -> Result<ToleranceStudyOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    write_json(&out.join("config.json"), cfg)?;
    let mut levels = Vec::new();
    let mut files = Vec::new();
    for (i, &eps) in cfg.tolerances.iter().enumerate() {
        let level = run_tolerance_level(cfg, eps)?;
        let path = out.join(format!("report_{i}.json"));
        write_json(&path, &level.report)?;
        files.push(path);
        levels.push(level);
    }
    let rows: Vec<ConvergenceRow> = levels.iter().map(LevelOutcome::convergence_row).collect();
    let conv = out.join("convergence.csv");
    write_convergence_csv(&conv, &rows)?;
    let scatter = out.join("scatter.csv");
    write_rows(
        &scatter,
        &["eps_tol", "trial", "seed", "error", "failed", "mse"],
        levels.iter().flat_map(|l| {
            l.trials.iter().map(move |t| {
                vec![
                    l.budget.eps_tol,
                    t.trial as f64,
                    t.seed as f64,
                    t.error,
                    f64::from(u8::from(t.failed)),
                    t.mse,
                ]
            })
        }),
    )?;
    let eps: Vec<f64> = rows.iter().map(|r| r.eps_tol).collect();
    let slope = |ys: Vec<f64>| -> Option<f64> {
        if ys.len() >= 3 {
            slope_fit(&eps, &ys).ok().map(|f| f.slope)
        } else {
            None
        }
    };
    let hfm_slope = slope(rows.iter().map(|r| r.cpu_time_hfm).collect());
    let predict_slope = slope(rows.iter().map(|r| r.cpu_time_rmfnn_predict).collect());
    let summary = out.join("summary.json");
    write_json(
        &summary,
        &serde_json::json!({
            "problem": cfg.problem,
            "rows": rows,
            "hfm_slope": hfm_slope,
            "predict_slope": predict_slope,
            "failure_probability": levels.iter().map(|l| l.failure_probability).collect::<Vec<_>>(),
            "hfm_measured": levels.iter().map(|l| l.hfm_measured).collect::<Vec<_>>(),
        }),
    )?;
    files.extend([conv, scatter, summary]);
    Ok(ToleranceStudyOutput {
        levels,
        rows,
        hfm_slope,
        predict_slope,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_runs() {
        let mut k = 0;
        let (_, v) = time_median(3, || {
            k += 1;
            Ok(k)
        })
        .unwrap();
        assert_eq!(v, 3);
    }

    #[test]
    fn finest_level_needs_flag() {
        let cfg = ToleranceStudyConfig {
            tolerances: vec![1e-4],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ToleranceStudyConfig {
            full_scale: true,
            ..cfg
        };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn coarse_level_smoke() {
        let cfg = ToleranceStudyConfig {
            tolerances: vec![1e-1],
            trials: 2,
            reference_points: 10_000,
            mse_points: 1000,
            cost_samples: 5,
            timing_repeats: 1,
            ..Default::default()
        };
        let l = run_tolerance_level(&cfg, 1e-1).unwrap();
        assert_eq!(l.trials.len(), 2);
        assert!(l.hfm_measured);
        assert!(l.failure_probability.is_none());
        assert_eq!(l.assembly.hf_calls, 8);
        assert!(l.ledger.with_training.w_rmfnn >= l.predict_time_s);
    }
}
