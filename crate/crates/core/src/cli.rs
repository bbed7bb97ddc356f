//! Command-line front end. Every subcommand reads an optional JSON config whose
//! keys match the flags; flags given on the command line win.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorCategory, Result};
use crate::experiments::{
    run_pedagogy, run_sweep, run_tolerance_study, write_rows, SweepConfig, ToleranceStudyConfig,
};
use crate::fidelity::{assemble, build_design, csv_err, DesignPlan, DesignRule, FidelityPair};
use crate::io::{format_f64, to_json_string, write_json};
use crate::net::{TrainConfig, TrainReport};
use crate::problems::ProblemId;
use crate::surrogate::{
    hfnn_build, load_bundle, rmfnn_alt_build, rmfnn_build, save_bundle, train_mfnn, Architecture, Bundle,
    BundleManifest, Method, Model, PlanSummary, Stage, Surrogate,
};
use crate::uq::{error_report, mc_estimate, plan_tolerance, EvalPoints, McEstimate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e.category() {
        ErrorCategory::Usage => EXIT_USAGE,
        ErrorCategory::Numerical => EXIT_NUMERICAL,
        ErrorCategory::Io => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(name = "rmfnn", version, about = "Residual multi-fidelity neural-network surrogates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Low/high-fidelity damped oscillator on a frequency grid.
    Pedagogy {
        #[arg(long, default_value = "out/pedagogy")]
        out: PathBuf,
    },
    /// Test error against the number of high-fidelity samples, per method.
    Sweep(SweepArgs),
    /// Monte-Carlo cost and error against the tolerance.
    ToleranceStudy(ToleranceArgs),
    /// Build one surrogate and save it as a bundle.
    Train(TrainArgs),
    /// Evaluate a saved bundle.
    Predict(PredictArgs),
    /// Monte-Carlo estimate of the mean of a bundle or a model.
    Mc(McArgs),
    /// Print the tolerance budget of a problem.
    Plan(PlanArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON file with the subcommand's settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub n_hf: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long)]
    pub n_test: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub checkpoints: bool,
    /// Full protocol: eleven sample counts up to 17000, 20 seeds, 10^6 test points.
    #[arg(long)]
    pub full_scale: bool,
}

#[derive(Debug, Args)]
pub struct ToleranceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub tolerances: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub no_hfm: bool,
    #[arg(long)]
    pub full_scale: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub interpolate: bool,
    #[arg(long)]
    pub n_hf: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    /// One parameter point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// CSV whose `theta_*` columns are the points.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    #[arg(long)]
    pub problem: Option<String>,
    /// `exact`, `hf` or `lf` when sampling a problem directly.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n_theta: Option<u64>,
    #[arg(long)]
    pub h_hf: Option<f64>,
    #[arg(long)]
    pub h_lf: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub interpolate: bool,
}

/// Settings of `train`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainCommandConfig {
    pub problem: ProblemId,
    pub method: Method,
    pub eps_tol: f64,
    pub interpolate: bool,
    /// High-fidelity samples for problems without a tolerance table.
    pub n_hf: usize,
    /// Network of problems without a tolerance table: `L` layers of `K` neurons.
    pub k: usize,
    pub l: usize,
    pub train: TrainConfig,
    /// Replace the budget's residual-network stage.
    pub resnn: Option<Stage>,
    /// Replace the budget's deep-network stage.
    pub dnn: Option<Stage>,
    pub seed: u64,
    pub mse_points: usize,
    pub out: PathBuf,
}

impl Default for TrainCommandConfig {
    fn default() -> Self {
        Self {
            problem: ProblemId::ParametricIvp,
            method: Method::Rmfnn,
            eps_tol: 1e-2,
            interpolate: false,
            n_hf: 250,
            k: 7,
            l: 7,
            train: TrainConfig {
                epochs: 2000,
                batch_size: 32,
                ..TrainConfig::default()
            },
            resnn: None,
            dnn: None,
            seed: 0,
            mse_points: 100_000,
            out: PathBuf::from("out/train"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McCommandConfig {
    pub bundle: Option<PathBuf>,
    pub problem: Option<ProblemId>,
    pub model: String,
    pub h_hf: Option<f64>,
    pub h_lf: Option<f64>,
    pub n_theta: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for McCommandConfig {
    fn default() -> Self {
        Self {
            bundle: None,
            problem: None,
            model: "exact".into(),
            h_hf: None,
            h_lf: None,
            n_theta: 10_000,
            seed: 0,
            out: None,
        }
    }
}

pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", p.display())))
        }
    }
}

fn parse_methods(names: &[String]) -> Result<Vec<Method>> {
    names.iter().map(|n| Method::parse(n)).collect()
}

pub fn sweep_config(a: &SweepArgs) -> Result<SweepConfig> {
    let mut c: SweepConfig = load_config(a.common.config.as_deref())?;
    if a.full_scale {
        c.n_hf = vec![250, 500, 1000, 1500, 2000, 3000, 4000, 6000, 9000, 13000, 17000];
        c.seeds = (0..20).collect();
        c.n_test = 1_000_000;
    }
    if let Some(s) = a.common.seed {
        c.seeds = vec![s];
    }
    if let Some(s) = &a.seeds {
        c.seeds = s.clone();
    }
    if let Some(n) = &a.n_hf {
        c.n_hf = n.clone();
    }
    if let Some(m) = &a.methods {
        c.methods = parse_methods(m)?;
    }
    if let Some(n) = a.n_test {
        c.n_test = n;
    }
    if let Some(e) = a.epochs {
        c.train.epochs = e;
    }
    if a.checkpoints {
        c.save_checkpoints = true;
    }
    c.validate()?;
    Ok(c)
}

pub fn tolerance_config(a: &ToleranceArgs) -> Result<ToleranceStudyConfig> {
    let mut c: ToleranceStudyConfig = load_config(a.common.config.as_deref())?;
    if let Some(p) = &a.problem {
        c.problem = ProblemId::parse(p)?;
    }
    if let Some(t) = &a.tolerances {
        c.tolerances = t.clone();
    }
    if let Some(n) = a.trials {
        c.trials = n;
    }
    if let Some(s) = a.common.seed {
        c.seed = s;
    }
    if a.no_hfm {
        c.run_hfm = false;
    }
    if a.full_scale {
        c.full_scale = true;
    }
    c.validate()?;
    Ok(c)
}

pub fn train_config(a: &TrainArgs) -> Result<TrainCommandConfig> {
    let mut c: TrainCommandConfig = load_config(a.common.config.as_deref())?;
    if let Some(p) = &a.problem {
        c.problem = ProblemId::parse(p)?;
    }
    if let Some(m) = &a.method {
        c.method = Method::parse(m)?;
    }
    if let Some(e) = a.eps {
        c.eps_tol = e;
    }
    if a.interpolate {
        c.interpolate = true;
    }
    if let Some(n) = a.n_hf {
        c.n_hf = n;
    }
    if let Some(e) = a.epochs {
        c.train.epochs = e;
    }
    if let Some(s) = a.common.seed {
        c.seed = s;
    }
    if let Some(o) = &a.common.out {
        c.out = o.clone();
    }
    if c.method == Method::Hfm {
        return Err(Error::config("hfm is the high-fidelity model itself and is not trained"));
    }
    Ok(c)
}

pub fn mc_config(a: &McArgs) -> Result<McCommandConfig> {
    let mut c: McCommandConfig = load_config(a.common.config.as_deref())?;
    if let Some(b) = &a.bundle {
        c.bundle = Some(b.clone());
    }
    if let Some(p) = &a.problem {
        c.problem = Some(ProblemId::parse(p)?);
    }
    if let Some(m) = &a.model {
        c.model = m.clone();
    }
    if let Some(n) = a.n_theta {
        c.n_theta = n;
    }
    if let Some(h) = a.h_hf {
        c.h_hf = Some(h);
    }
    if let Some(h) = a.h_lf {
        c.h_lf = Some(h);
    }
    if let Some(s) = a.common.seed {
        c.seed = s;
    }
    if let Some(o) = &a.common.out {
        c.out = Some(o.clone());
    }
    Ok(c)
}

/// Summary written next to a trained bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub config: TrainCommandConfig,
    pub reports: Vec<TrainReport>,
    pub test_mse: f64,
    pub n_test: usize,
}

fn table_problem(p: ProblemId) -> bool {
    matches!(p, ProblemId::ParametricIvp | ProblemId::WaveIbvp)
}

fn prepare(c: &TrainCommandConfig) -> Result<(FidelityPair, DesignPlan, Stage, Stage, PlanSummary)> {
    if table_problem(c.problem) {
        let b = plan_tolerance(c.problem, c.eps_tol, c.interpolate)?;
        let pair = FidelityPair::for_problem(c.problem, b.h_hf, b.h_lf)?;
        let plan = build_design(&pair.domain, &b.design)?;
        let resnn = c.resnn.clone().unwrap_or(b.resnn);
        let dnn = c.dnn.clone().unwrap_or(b.dnn);
        let summary = PlanSummary {
            n: plan.n(),
            n_i: plan.n_i(),
            rule: Some(b.design),
            h_hf: Some(b.h_hf),
            h_lf: Some(b.h_lf),
        };
        Ok((pair, plan, resnn, dnn, summary))
    } else {
        let pair = match c.problem {
            ProblemId::DampedOscillator => FidelityPair::damped(crate::problems::DAMPED_DT)?,
            _ => FidelityPair::pulsed(),
        };
        let stride = if c.method == Method::Rmfnn { 4 } else { 1 };
        let rule = DesignRule::UniformRandom {
            n: c.n_hf * stride,
            stride,
            seed: c.seed,
        };
        let plan = build_design(&pair.domain, &rule)?;
        let stage = Stage::new(Architecture::resnet(c.k, c.l), c.train.clone());
        let resnn = c.resnn.clone().unwrap_or_else(|| stage.clone());
        let dnn = c.dnn.clone().unwrap_or(stage);
        let summary = PlanSummary {
            n: plan.n(),
            n_i: plan.n_i(),
            rule: Some(rule),
            h_hf: pair.discretization.map(|d| d.h_hf),
            h_lf: pair.discretization.map(|d| d.h_lf),
        };
        Ok((pair, plan, resnn, dnn, summary))
    }
}

fn seeded(s: Stage, seed: u64) -> Stage {
    Stage::new(s.arch, s.train.with_seed(seed))
}

/// Build the configured surrogate, save it as a bundle in `c.out` together
/// with `dataset.csv`, `predictions.csv` and `summary.json`.
pub fn cmd_train(c: &TrainCommandConfig) -> Result<Bundle> {
    let (mut pair, plan, resnn, dnn, plan_summary) = prepare(c)?;
    let (resnn, dnn) = (seeded(resnn, c.seed), seeded(dnn, c.seed));
    let mut manifest = BundleManifest::new(c.method, Some(c.problem), pair.domain.clone(), plan_summary);
    manifest.seeds = vec![c.seed];
    let (bundle, dataset, reports) = match c.method {
        Method::Rmfnn => {
            let b = rmfnn_build(&mut pair, &plan, &resnn, &dnn)?;
            let mut reports: Vec<TrainReport> = b.resnn_report.into_iter().collect();
            reports.push(b.dnn_report);
            let mut bundle = Bundle::new(manifest, Model::Target(b.surrogate));
            bundle.residual = b.residual;
            (bundle, b.dataset, reports)
        }
        Method::RmfnnAlt => {
            let (data, _) = assemble(&mut pair, &plan)?;
            let (comp, reports) = rmfnn_alt_build(&data, &resnn, None, pair.lf_evaluator())?;
            (Bundle::new(manifest, Model::Composite(comp)), data, reports)
        }
        Method::Mfnn => {
            let (data, _) = assemble(&mut pair, &plan)?;
            let (m, r) = train_mfnn(&data.real_subset(), &dnn, pair.lf_evaluator())?;
            (Bundle::new(manifest, Model::Mfnn(m)), data, vec![r])
        }
        Method::Hfnn => {
            let (data, _) = assemble(&mut pair, &plan)?;
            let (t, r) = hfnn_build(&data, &dnn)?;
            (Bundle::new(manifest, Model::Target(t)), data, vec![r])
        }
        Method::Hfm => return Err(Error::config("hfm is not trained")),
    };

    let exact = |t: &[f64]| c.problem.reference(t);
    let points = EvalPoints::default_for(pair.dim(), c.mse_points, c.seed);
    let rep = error_report(&bundle, &exact, &pair.domain, &points, None)?;
    let mut bundle = bundle;
    bundle.manifest.metrics.insert("test_mse".into(), rep.mse);
    for (i, r) in reports.iter().enumerate() {
        if let Some(v) = r.best_val_loss {
            bundle.manifest.metrics.insert(format!("best_val_loss_{i}"), v);
        }
    }
    std::fs::create_dir_all(&c.out)?;
    save_bundle(&c.out, &bundle)?;
    dataset.write_csv(&c.out.join("dataset.csv"))?;
    write_predictions(&c.out.join("predictions.csv"), &bundle, dataset.records.iter().map(|r| r.theta.clone()))?;
    write_json(
        &c.out.join("summary.json"),
        &TrainSummary {
            config: c.clone(),
            reports,
            test_mse: rep.mse,
            n_test: rep.n_eval,
        },
    )?;
    Ok(bundle)
}

pub fn write_predictions(
    path: &Path,
    model: &dyn Surrogate,
    points: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    let rows = points
        .into_iter()
        .map(|t| {
            let p = model.predict(&t)?;
            let mut row = t;
            row.push(p);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let d = rows.first().map_or(0, |r| r.len() - 1);
    let header: Vec<String> = (0..d).map(|k| format!("theta_{k}")).chain(["prediction".into()]).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(path, &header, rows)
}

/// Parameter points from the `theta_*` columns of a CSV.
pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = rd.headers().map_err(csv_err)?.clone();
    let cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("theta_"))
        .map(|(i, _)| i)
        .collect();
    if cols.is_empty() {
        return Err(Error::parse(path.display(), "no theta_* columns"));
    }
    rd.records()
        .enumerate()
        .map(|(i, row)| {
            let row = row.map_err(csv_err)?;
            cols.iter()
                .map(|&c| {
                    row[c]
                        .parse::<f64>()
                        .map_err(|e| Error::parse(format!("{}, line {}", path.display(), i + 2), e))
                })
                .collect()
        })
        .collect()
}

pub fn cmd_predict(a: &PredictArgs) -> Result<Vec<f64>> {
    let dir = a
        .bundle
        .as_ref()
        .ok_or_else(|| Error::arg("predict needs --bundle <dir>"))?;
    let bundle = load_bundle(dir)?;
    let points = match (&a.theta, &a.points) {
        (Some(t), None) => vec![t.clone()],
        (None, Some(p)) => read_points(p)?,
        _ => return Err(Error::arg("give exactly one of --theta or --points")),
    };
    let preds = points.iter().map(|t| bundle.predict(t)).collect::<Result<Vec<_>>>()?;
    match &a.common.out {
        Some(out) => write_predictions(out, &bundle, points)?,
        None => {
            for p in &preds {
                println!("{}", format_f64(*p));
            }
        }
    }
    Ok(preds)
}

pub fn cmd_mc(c: &McCommandConfig) -> Result<McEstimate> {
    let est = match (&c.bundle, c.problem) {
        (Some(dir), None) => {
            let b = load_bundle(dir)?;
            mc_estimate(&b, &b.manifest.domain, c.n_theta, c.seed)?
        }
        (None, Some(p)) => {
            let domain = p.domain();
            match c.model.as_str() {
                "exact" => mc_estimate(&|t: &[f64]| p.reference(t), &domain, c.n_theta, c.seed)?,
                m @ ("hf" | "lf") => {
                    let pair = match p {
                        ProblemId::DampedOscillator => FidelityPair::damped(c.h_hf.unwrap_or(crate::problems::DAMPED_DT))?,
                        ProblemId::PulsedOscillator => FidelityPair::pulsed(),
                        _ => {
                            let (h, l) = c
                                .h_hf
                                .zip(c.h_lf)
                                .ok_or_else(|| Error::arg(format!("{p} needs --h-hf and --h-lf")))?;
                            FidelityPair::for_problem(p, h, l)?
                        }
                    };
                    let f = if m == "hf" { pair.hf_evaluator() } else { pair.lf_evaluator() };
                    mc_estimate(&|t: &[f64]| f(t), &domain, c.n_theta, c.seed)?
                }
                other => return Err(Error::arg(format!("unknown model '{other}' (expected exact, hf or lf)"))),
            }
        }
        _ => return Err(Error::arg("give exactly one of --bundle or --problem")),
    };
    match &c.out {
        Some(o) => write_json(o, &est)?,
        None => print!("{}", to_json_string(&est)?),
    }
    Ok(est)
}

pub fn cmd_plan(a: &PlanArgs) -> Result<crate::uq::ToleranceBudget> {
    #[derive(Deserialize, Default)]
    #[serde(default, deny_unknown_fields)]
    struct PlanConfig {
        problem: Option<ProblemId>,
        eps_tol: Option<f64>,
        interpolate: bool,
    }
    let cfg: PlanConfig = load_config(a.common.config.as_deref())?;
    let problem = match &a.problem {
        Some(p) => ProblemId::parse(p)?,
        None => cfg.problem.ok_or_else(|| Error::arg("plan needs --problem"))?,
    };
    let eps = a.eps.or(cfg.eps_tol).ok_or_else(|| Error::arg("plan needs --eps"))?;
    let b = plan_tolerance(problem, eps, a.interpolate || cfg.interpolate)?;
    match &a.common.out {
        Some(o) => write_json(o, &b)?,
        None => print!("{}", to_json_string(&b)?),
    }
    Ok(b)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pedagogy { out } => {
            let o = run_pedagogy(&out)?;
            eprintln!(
                "wrote {} rows; correlation below/above 30: {:.6} / {:.6}",
                o.rows.len(),
                o.corr_low,
                o.corr_high
            );
        }
        Command::Sweep(a) => {
            let c = sweep_config(&a)?;
            let out = a.common.out.clone().unwrap_or_else(|| PathBuf::from("out/sweep"));
            let o = run_sweep(&c, &out)?;
            for r in &o.aggregate {
                eprintln!("{:<10} n_hf={:<6} mean_mse={:.4e} std={:.2e}", r.method, r.n_hf, r.mean_mse, r.std_mse);
            }
        }
        Command::ToleranceStudy(a) => {
            let c = tolerance_config(&a)?;
            let out = a.common.out.clone().unwrap_or_else(|| PathBuf::from("out/tolerance"));
            let o = run_tolerance_study(&c, &out)?;
            for r in &o.rows {
                eprintln!(
                    "eps={:.3e} hfm={:.3e}s rmfnn={:.3e}s predict={:.3e}s error={:.3e}",
                    r.eps_tol, r.cpu_time_hfm, r.cpu_time_rmfnn_total, r.cpu_time_rmfnn_predict, r.error
                );
            }
        }
        Command::Train(a) => {
            let c = train_config(&a)?;
            let b = cmd_train(&c)?;
            eprintln!("saved {} bundle to {}", b.manifest.method, c.out.display());
        }
        Command::Predict(a) => {
            cmd_predict(&a)?;
        }
        Command::Mc(a) => {
            cmd_mc(&mc_config(&a)?)?;
        }
        Command::Plan(a) => {
            cmd_plan(&a)?;
        }
    }
    Ok(())
}

/// Parse `args`, run the subcommand and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_categories() {
        assert_eq!(exit_code(&Error::config("x")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::TrainingDiverged { epoch: 1 }), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::parse("f", "m")), EXIT_IO);
    }

    #[test]
    fn unknown_config_key_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"problem": "parametric-ivp", "epoch": 3}"#).unwrap();
        let e = load_config::<TrainCommandConfig>(Some(&p)).unwrap_err();
        assert!(e.to_string().contains("epoch"), "{e}");
        assert_eq!(exit_code(&e), EXIT_USAGE);
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"seeds": [1, 2], "n_hf": [30]}"#).unwrap();
        let cli = Cli::try_parse_from(["rmfnn", "sweep", "--config", p.to_str().unwrap(), "--seed", "9"]).unwrap();
        let Command::Sweep(a) = cli.command else { panic!() };
        let c = sweep_config(&a).unwrap();
        assert_eq!(c.seeds, vec![9]);
        assert_eq!(c.n_hf, vec![30]);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["rmfnn", "plan", "--problem", "nope", "--eps", "0.01"]), EXIT_USAGE);
        assert_eq!(run(["rmfnn", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["rmfnn", "plan", "--problem", "ivp", "--eps", "0.01", "--out", "/dev/null"]), EXIT_OK);
    }

    #[test]
    fn dataset_points_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        let d = crate::fidelity::Dataset {
            domain: ProblemId::PulsedOscillator.domain(),
            normalized: false,
            records: vec![crate::fidelity::Record {
                theta: vec![6.0, 1.0, 0.1, 4.2],
                q_lf: 1.0,
                q_hf: None,
                provenance: None,
            }],
        };
        d.write_csv(&p).unwrap();
        assert_eq!(read_points(&p).unwrap(), vec![vec![6.0, 1.0, 0.1, 4.2]]);
    }
}
