//! On-disk surrogate bundles: one checkpoint per network plus `manifest.json`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    CompositeSurrogate, InputMap, LfSource, Method, MfnnSurrogate, ResidualSurrogate, Surrogate, TargetSurrogate,
};
use crate::error::{Error, Result};
use crate::fidelity::{DesignRule, Evaluator, FidelityPair};
use crate::io::{ensure_dir, read_json, write_json};
use crate::net::{load_network, save_network};
use crate::problems::{Domain, ProblemId};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetRole {
    Dnn,
    Resnn,
    LfDnn,
}

impl NetRole {
    fn file(self) -> &'static str {
        match self {
            NetRole::Dnn => "dnn.json",
            NetRole::Resnn => "resnn.json",
            NetRole::LfDnn => "lf_dnn.json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleNetwork {
    pub role: NetRole,
    pub file: String,
    /// Input normalization the network was trained with.
    pub map: InputMap,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSummary {
    pub n: usize,
    pub n_i: usize,
    #[serde(default)]
    pub rule: Option<DesignRule>,
    #[serde(default)]
    pub h_hf: Option<f64>,
    #[serde(default)]
    pub h_lf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleManifest {
    pub method: Method,
    #[serde(default)]
    pub problem: Option<ProblemId>,
    pub domain: Domain,
    pub plan: PlanSummary,
    /// Filled in by `save_bundle`.
    #[serde(default)]
    pub networks: Vec<BundleNetwork>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
}

impl BundleManifest {
    pub fn new(method: Method, problem: Option<ProblemId>, domain: Domain, plan: PlanSummary) -> Self {
        Self {
            method,
            problem,
            domain,
            plan,
            networks: Vec::new(),
            seeds: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    /// Low-fidelity model of the recorded problem at the recorded resolution.
    pub fn lf_evaluator(&self) -> Result<Evaluator> {
        let problem = self
            .problem
            .ok_or_else(|| Error::Unsupported("bundle has no problem to rebuild its low-fidelity model".into()))?;
        let h_hf = self.plan.h_hf.unwrap_or(f64::NAN);
        let h_lf = self.plan.h_lf.unwrap_or(f64::NAN);
        let pair = match problem {
            ProblemId::DampedOscillator => FidelityPair::damped(self.plan.h_hf.unwrap_or(crate::problems::DAMPED_DT))?,
            ProblemId::PulsedOscillator => FidelityPair::pulsed(),
            _ => FidelityPair::for_problem(problem, h_hf, h_lf)?,
        };
        Ok(pair.lf_evaluator())
    }
}

/// A trained predictor of any method.
#[derive(Debug, Clone)]
pub enum Model {
    Target(TargetSurrogate),
    Mfnn(MfnnSurrogate),
    Composite(CompositeSurrogate),
}

impl Surrogate for Model {
    fn predict(&self, theta: &[f64]) -> Result<f64> {
        match self {
            Model::Target(t) => t.predict(theta),
            Model::Mfnn(m) => m.predict(theta),
            Model::Composite(c) => c.predict(theta),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub manifest: BundleManifest,
    pub model: Model,
    /// Residual network of the full pipeline, kept for inspection; not used to predict.
    pub residual: Option<ResidualSurrogate>,
}

impl Bundle {
    pub fn new(manifest: BundleManifest, model: Model) -> Self {
        Self {
            manifest,
            model,
            residual: None,
        }
    }
}

impl Surrogate for Bundle {
    fn predict(&self, theta: &[f64]) -> Result<f64> {
        self.model.predict(theta)
    }
}

/// Write every network of `bundle` and its manifest into `dir`.
pub fn save_bundle(dir: &Path, bundle: &Bundle) -> Result<BundleManifest> {
    ensure_dir(dir)?;
    let mut nets = Vec::new();
    let mut put = |role: NetRole, net: &crate::net::Network, map: &InputMap| -> Result<()> {
        save_network(net, &dir.join(role.file()))?;
        nets.push(BundleNetwork {
            role,
            file: role.file().to_string(),
            map: map.clone(),
        });
        Ok(())
    };
    match &bundle.model {
        Model::Target(t) | Model::Mfnn(MfnnSurrogate { target: t, .. }) => {
            put(NetRole::Dnn, &t.net, &t.map)?;
            if let Some(r) = &bundle.residual {
                put(NetRole::Resnn, &r.net, &r.map)?;
            }
        }
        Model::Composite(c) => {
            put(NetRole::Resnn, &c.residual.net, &c.residual.map)?;
            if let LfSource::Network(t) = &c.lf_source {
                put(NetRole::LfDnn, &t.net, &t.map)?;
            }
        }
    }
    let mut manifest = bundle.manifest.clone();
    manifest.networks = nets;
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Read a bundle back; low-fidelity models are rebuilt from the manifest when needed.
pub fn load_bundle(dir: &Path) -> Result<Bundle> {
    let manifest: BundleManifest = read_json(&dir.join(MANIFEST_FILE))?;
    let find = |role: NetRole| -> Result<Option<(crate::net::Network, InputMap)>> {
        match manifest.networks.iter().find(|n| n.role == role) {
            None => Ok(None),
            Some(n) => {
                let net = load_network(&dir.join(&n.file))?;
                if net.input_dim() != n.map.input_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: n.map.input_dim(),
                        actual: net.input_dim(),
                    });
                }
                Ok(Some((net, n.map.clone())))
            }
        }
    };
    let missing = |role: NetRole| Error::parse(dir.display(), format!("manifest lists no {} network", role.file()));
    let mut residual = None;
    let model = match manifest.method {
        Method::Rmfnn | Method::Hfnn => {
            residual = find(NetRole::Resnn)?.map(|(net, map)| ResidualSurrogate { net, map });
            let (net, map) = find(NetRole::Dnn)?.ok_or_else(|| missing(NetRole::Dnn))?;
            Model::Target(TargetSurrogate {
                method: manifest.method,
                net,
                map,
            })
        }
        Method::Mfnn => {
            let (net, map) = find(NetRole::Dnn)?.ok_or_else(|| missing(NetRole::Dnn))?;
            Model::Mfnn(MfnnSurrogate {
                target: TargetSurrogate {
                    method: Method::Mfnn,
                    net,
                    map,
                },
                lf: manifest.lf_evaluator()?,
            })
        }
        Method::RmfnnAlt => {
            let (net, map) = find(NetRole::Resnn)?.ok_or_else(|| missing(NetRole::Resnn))?;
            let lf_source = match find(NetRole::LfDnn)? {
                Some((lnet, lmap)) => LfSource::Network(TargetSurrogate {
                    method: Method::RmfnnAlt,
                    net: lnet,
                    map: lmap,
                }),
                None => LfSource::Direct(manifest.lf_evaluator()?),
            };
            Model::Composite(CompositeSurrogate {
                lf_source,
                residual: ResidualSurrogate { net, map },
            })
        }
        Method::Hfm => return Err(Error::Unsupported("the high-fidelity model has no bundle".into())),
    };
    Ok(Bundle {
        manifest,
        model,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Network;
    use crate::surrogate::{Architecture, LfScaling};

    fn net(input: usize, seed: u64) -> Network {
        Network::init(&Architecture::dense(2, 5).spec(input, seed)).unwrap()
    }

    fn plan() -> PlanSummary {
        PlanSummary {
            n: 241,
            n_i: 25,
            rule: Some(DesignRule::grid_stride(241, 10)),
            h_hf: Some(0.1),
            h_lf: Some(0.5),
        }
    }

    #[test]
    fn target_bundle_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let domain = ProblemId::ParametricIvp.domain();
        let t = TargetSurrogate {
            method: Method::Rmfnn,
            net: net(1, 1),
            map: InputMap::theta_only(domain.clone()),
        };
        let mut manifest = BundleManifest::new(Method::Rmfnn, Some(ProblemId::ParametricIvp), domain, plan());
        manifest.seeds = vec![3];
        manifest.metrics.insert("val_mse".into(), 0.25);
        let b = Bundle::new(manifest, Model::Target(t.clone()));
        save_bundle(dir.path(), &b).unwrap();
        let back = load_bundle(dir.path()).unwrap();
        assert_eq!(back.manifest.seeds, vec![3]);
        assert_eq!(back.manifest.networks.len(), 1);
        let th = [0.7];
        assert_eq!(back.predict(&th).unwrap().to_bits(), t.predict(&th).unwrap().to_bits());
    }

    #[test]
    fn composite_bundle_rebuilds_low_fidelity() {
        let dir = tempfile::tempdir().unwrap();
        let pair = FidelityPair::pulsed();
        let domain = pair.domain.clone();
        let residual = ResidualSurrogate {
            net: net(5, 2),
            map: InputMap::with_lf(domain.clone(), LfScaling { min: -1.0, scale: 3.0 }),
        };
        let c = CompositeSurrogate {
            lf_source: LfSource::Direct(pair.lf_evaluator()),
            residual,
        };
        let manifest = BundleManifest::new(Method::RmfnnAlt, Some(ProblemId::PulsedOscillator), domain, PlanSummary::default());
        let b = Bundle::new(manifest, Model::Composite(c.clone()));
        save_bundle(dir.path(), &b).unwrap();
        let back = load_bundle(dir.path()).unwrap();
        let th = [20.0, 3.0, 0.1, 4.2];
        assert_eq!(back.predict(&th).unwrap().to_bits(), c.predict(&th).unwrap().to_bits());
    }

    #[test]
    fn missing_manifest_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let e = load_bundle(dir.path()).unwrap_err();
        assert_eq!(e.category(), crate::ErrorCategory::Io);
    }
}
