use serde::{Deserialize, Serialize};

use super::{
    Architecture, CompositeSurrogate, InputMap, LfScaling, LfSource, Method, MfnnSurrogate, ResidualSurrogate,
    TargetSurrogate,
};
use crate::error::{Error, Result};
use crate::fidelity::{assemble, AssemblyCosts, Dataset, DesignPlan, Evaluator, FidelityPair, Provenance, Record};
use crate::net::{train, Samples, TrainConfig, TrainReport};

/// Network layout plus training settings for one training stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub arch: Architecture,
    pub train: TrainConfig,
}

impl Stage {
    pub fn new(arch: Architecture, train: TrainConfig) -> Self {
        Self { arch, train }
    }
}

fn theta_inputs(data: &Dataset, r: &Record) -> Vec<f64> {
    if data.normalized {
        r.theta.clone()
    } else {
        data.domain.to_unit(&r.theta)
    }
}

fn physical_theta(data: &Dataset, r: &Record) -> Vec<f64> {
    if data.normalized {
        data.domain.from_unit(&r.theta)
    } else {
        r.theta.clone()
    }
}

fn require_hf(data: &Dataset, real_only: bool) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyData("dataset has no records".into()));
    }
    for (index, r) in data.records.iter().enumerate() {
        if r.q_hf.is_none() {
            return Err(Error::MissingTarget { index });
        }
        if real_only && r.provenance != Some(Provenance::Real) {
            return Err(Error::arg(format!("record {index} carries a synthetic target")));
        }
    }
    Ok(())
}

fn fit(samples: &Samples, arch: &Architecture, cfg: &TrainConfig) -> Result<(crate::net::Network, TrainReport)> {
    train(samples, &arch.spec(samples.input_dim(), cfg.seed), cfg)
}

/// Learn `(theta, Q_LF) -> Q_HF - Q_LF` from records that all carry real `q_hf`.
pub fn train_resnn(data: &Dataset, stage: &Stage) -> Result<(ResidualSurrogate, TrainReport)> {
    require_hf(data, true)?;
    let scaling = LfScaling::fit(data.records.iter().map(|r| r.q_lf))?;
    let mut samples = Samples::new(data.dim() + 1, 1);
    for r in &data.records {
        let mut x = theta_inputs(data, r);
        x.push(scaling.apply(r.q_lf));
        samples.push(&x, &[r.q_hf.unwrap() - r.q_lf])?;
    }
    let (net, report) = fit(&samples, &stage.arch, &stage.train)?;
    let domain = data.domain.clone();
    Ok((
        ResidualSurrogate {
            net,
            map: InputMap::with_lf(domain, scaling),
        },
        report,
    ))
}

/// Fill every record lacking `q_hf` with `q_lf + residual(theta, q_lf)`.
pub fn synthesize_hf(res: &ResidualSurrogate, data: &Dataset) -> Result<Dataset> {
    let records = data
        .records
        .iter()
        .map(|r| {
            if r.q_hf.is_some() {
                return Ok(r.clone());
            }
            let f = res.residual(&physical_theta(data, r), r.q_lf)?;
            Ok(Record {
                q_hf: Some(r.q_lf + f),
                provenance: Some(Provenance::Synthetic),
                ..r.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        records,
        ..data.clone()
    })
}

fn train_theta_map(
    data: &Dataset,
    stage: &Stage,
    method: Method,
    target: impl Fn(&Record) -> f64,
) -> Result<(TargetSurrogate, TrainReport)> {
    let mut samples = Samples::new(data.dim(), 1);
    for r in &data.records {
        samples.push(&theta_inputs(data, r), &[target(r)])?;
    }
    let (net, report) = fit(&samples, &stage.arch, &stage.train)?;
    let domain = data.domain.clone();
    Ok((
        TargetSurrogate {
            method,
            net,
            map: InputMap::theta_only(domain),
        },
        report,
    ))
}

/// Learn `theta -> Q_HF` from real and synthetic targets.
pub fn train_dnn(data: &Dataset, stage: &Stage) -> Result<(TargetSurrogate, TrainReport)> {
    require_hf(data, false)?;
    train_theta_map(data, stage, Method::Rmfnn, |r| r.q_hf.unwrap())
}

/// Learn `theta -> Q_HF` from real targets only.
pub fn train_hfnn(data: &Dataset, stage: &Stage) -> Result<(TargetSurrogate, TrainReport)> {
    require_hf(data, true)?;
    train_theta_map(data, stage, Method::Hfnn, |r| r.q_hf.unwrap())
}

/// Learn `theta -> Q_LF`, the network low-fidelity source of the composite surrogate.
pub fn train_lf_dnn(data: &Dataset, stage: &Stage) -> Result<(TargetSurrogate, TrainReport)> {
    if data.is_empty() {
        return Err(Error::EmptyData("dataset has no records".into()));
    }
    train_theta_map(data, stage, Method::RmfnnAlt, |r| r.q_lf)
}

/// Learn `(theta, Q_LF) -> Q_HF` from real targets.
pub fn train_mfnn(data: &Dataset, stage: &Stage, lf: Evaluator) -> Result<(MfnnSurrogate, TrainReport)> {
    require_hf(data, true)?;
    let scaling = LfScaling::fit(data.records.iter().map(|r| r.q_lf))?;
    let mut samples = Samples::new(data.dim() + 1, 1);
    for r in &data.records {
        let mut x = theta_inputs(data, r);
        x.push(scaling.apply(r.q_lf));
        samples.push(&x, &[r.q_hf.unwrap()])?;
    }
    let (net, report) = fit(&samples, &stage.arch, &stage.train)?;
    let domain = data.domain.clone();
    Ok((
        MfnnSurrogate {
            target: TargetSurrogate {
                method: Method::Mfnn,
                net,
                map: InputMap::with_lf(domain, scaling),
            },
            lf,
        },
        report,
    ))
}

/// Everything produced by one run of the main pipeline.
#[derive(Debug, Clone)]
pub struct RmfnnBuild {
    pub surrogate: TargetSurrogate,
    /// Absent when `Theta_II` is empty and nothing needed synthesizing.
    pub residual: Option<ResidualSurrogate>,
    pub resnn_report: Option<TrainReport>,
    pub dnn_report: TrainReport,
    /// Real plus synthetic records the deep network was trained on.
    pub dataset: Dataset,
    pub costs: AssemblyCosts,
}

/// Assemble, learn the residual on `Theta_I`, synthesize on `Theta_II`, fit the deep network.
pub fn rmfnn_build(pair: &mut FidelityPair, plan: &DesignPlan, resnn: &Stage, dnn: &Stage) -> Result<RmfnnBuild> {
    let (data, costs) = assemble(pair, plan)?;
    rmfnn_from_dataset(&data, costs, resnn, dnn)
}

/// Steps after assembly: residual network, synthesis, deep network.
pub fn rmfnn_from_dataset(
    data: &Dataset,
    costs: AssemblyCosts,
    resnn: &Stage,
    dnn: &Stage,
) -> Result<RmfnnBuild> {
    let needs_synthesis = data.records.iter().any(|r| r.q_hf.is_none());
    let (residual, resnn_report, full) = if needs_synthesis {
        let (res, report) = train_resnn(&data.real_subset(), resnn)?;
        let full = synthesize_hf(&res, data)?;
        (Some(res), Some(report), full)
    } else {
        (None, None, data.clone())
    };
    let (surrogate, dnn_report) = train_dnn(&full, dnn)?;
    Ok(RmfnnBuild {
        surrogate,
        residual,
        resnn_report,
        dnn_report,
        dataset: full,
        costs,
    })
}

/// Composite surrogate: the residual network on top of either the direct low-fidelity
/// model (`lf_stage = None`) or a network trained on all `N` low-fidelity values.
pub fn rmfnn_alt_build(
    data: &Dataset,
    resnn: &Stage,
    lf_stage: Option<&Stage>,
    lf: Evaluator,
) -> Result<(CompositeSurrogate, Vec<TrainReport>)> {
    let (residual, report) = train_resnn(&data.real_subset(), resnn)?;
    let mut reports = vec![report];
    let lf_source = match lf_stage {
        None => LfSource::Direct(lf),
        Some(stage) => {
            let (net, r) = train_lf_dnn(data, stage)?;
            reports.push(r);
            LfSource::Network(net)
        }
    };
    Ok((CompositeSurrogate { lf_source, residual }, reports))
}

/// MFNN baseline trained on the real records of a freshly assembled design.
pub fn mfnn_build(pair: &mut FidelityPair, plan: &DesignPlan, stage: &Stage) -> Result<(MfnnSurrogate, TrainReport)> {
    let (data, _) = assemble(pair, plan)?;
    let lf = pair.lf_evaluator();
    train_mfnn(&data.real_subset(), stage, lf)
}

/// HFNN baseline on the real records of `data`.
pub fn hfnn_build(data: &Dataset, stage: &Stage) -> Result<(TargetSurrogate, TrainReport)> {
    train_hfnn(&data.real_subset(), stage)
}
