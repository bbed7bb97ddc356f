//! Residual multi-fidelity surrogates and the MFNN/HFNN baselines.
//!
//! The main pipeline trains a small residual network on `Theta_I`, uses it to
//! synthesize high-fidelity values on `Theta_II`, then fits a deep network to
//! all `N` points. The composite variant instead evaluates
//! `lf(theta) + residual(theta, lf(theta))` at query time.

mod bound;
mod build;
mod bundle;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::Evaluator;
use crate::net::{Network, NetworkSpec};
use crate::problems::Domain;

pub use bound::{conjecture_bound, fit_conjecture_constants, ConjectureConstants};
pub use build::{
    hfnn_build, mfnn_build, rmfnn_alt_build, rmfnn_build, rmfnn_from_dataset, synthesize_hf, train_dnn, train_hfnn, train_lf_dnn,
    train_mfnn, train_resnn, RmfnnBuild, Stage,
};
pub use bundle::{load_bundle, save_bundle, Bundle, BundleManifest, BundleNetwork, Model, NetRole, PlanSummary, MANIFEST_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rmfnn,
    RmfnnAlt,
    Mfnn,
    Hfnn,
    Hfm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rmfnn => "rmfnn",
            Method::RmfnnAlt => "rmfnn-alt",
            Method::Mfnn => "mfnn",
            Method::Hfnn => "hfnn",
            Method::Hfm => "hfm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "rmfnn" => Ok(Method::Rmfnn),
            "rmfnn-alt" => Ok(Method::RmfnnAlt),
            "mfnn" => Ok(Method::Mfnn),
            "hfnn" => Ok(Method::Hfnn),
            "hfm" => Ok(Method::Hfm),
            other => Err(Error::arg(format!(
                "unknown method '{other}' (expected rmfnn, rmfnn-alt, mfnn, hfnn or hfm)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hidden layout of a network; input and output sizes follow from its role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    pub hidden_widths: Vec<usize>,
    #[serde(default)]
    pub shortcut_period: usize,
}

impl Architecture {
    /// `depth` hidden layers of `width` neurons.
    pub fn dense(depth: usize, width: usize) -> Self {
        Self {
            hidden_widths: vec![width; depth],
            shortcut_period: 0,
        }
    }

    pub fn with_shortcuts(mut self, period: usize) -> Self {
        self.shortcut_period = period;
        self
    }

    /// `L` layers (hidden plus output) of `K` neurons, shortcuts every two layers.
    pub fn resnet(k: usize, l: usize) -> Self {
        Self::dense(l.saturating_sub(1), k).with_shortcuts(2)
    }

    pub fn spec(&self, input_dim: usize, seed: u64) -> NetworkSpec {
        NetworkSpec {
            input_dim,
            hidden_widths: self.hidden_widths.clone(),
            output_dim: 1,
            shortcut_period: self.shortcut_period,
            seed,
        }
    }
}

/// Min-max scaling of the low-fidelity input channel, fitted on training data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LfScaling {
    pub min: f64,
    pub scale: f64,
}

impl LfScaling {
    pub fn fit(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::EmptyData("no finite low-fidelity values to scale".into()));
        }
        // a constant channel maps to zero rather than dividing by zero
        let scale = if hi > lo { hi - lo } else { 1.0 };
        Ok(Self { min: lo, scale })
    }

    pub fn apply(&self, q_lf: f64) -> f64 {
        (q_lf - self.min) / self.scale
    }
}

/// Maps raw `(theta[, q_lf])` to network inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputMap {
    pub domain: Domain,
    pub lf: Option<LfScaling>,
}

impl InputMap {
    pub fn theta_only(domain: Domain) -> Self {
        Self { domain, lf: None }
    }

    pub fn with_lf(domain: Domain, lf: LfScaling) -> Self {
        Self { domain, lf: Some(lf) }
    }

    pub fn input_dim(&self) -> usize {
        self.domain.dim() + usize::from(self.lf.is_some())
    }

    pub fn encode(&self, theta: &[f64], q_lf: Option<f64>) -> Result<Vec<f64>> {
        if theta.len() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                actual: theta.len(),
            });
        }
        let mut x = self.domain.to_unit(theta);
        match (self.lf, q_lf) {
            (Some(s), Some(q)) => x.push(s.apply(q)),
            (None, _) => {}
            (Some(_), None) => return Err(Error::arg("this network needs a low-fidelity input")),
        }
        Ok(x)
    }
}

/// Anything that maps a parameter point to a prediction of `Q_HF`.
pub trait Surrogate: Send + Sync {
    fn predict(&self, theta: &[f64]) -> Result<f64>;

    fn predict_many(&self, thetas: &[Vec<f64>]) -> Result<Vec<f64>> {
        thetas.iter().map(|t| self.predict(t)).collect()
    }
}

impl<F> Surrogate for F
where
    F: Fn(&[f64]) -> Result<f64> + Send + Sync,
{
    fn predict(&self, theta: &[f64]) -> Result<f64> {
        self(theta)
    }
}

/// Network learning `(theta, Q_LF) -> Q_HF - Q_LF`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSurrogate {
    pub net: Network,
    pub map: InputMap,
}

impl ResidualSurrogate {
    pub fn residual(&self, theta: &[f64], q_lf: f64) -> Result<f64> {
        self.net.forward_first(&self.map.encode(theta, Some(q_lf))?)
    }
}

/// Network learning a scalar quantity from `theta`, or from `(theta, Q_LF)` for MFNN.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSurrogate {
    pub method: Method,
    pub net: Network,
    pub map: InputMap,
}

impl TargetSurrogate {
    pub fn predict_with_lf(&self, theta: &[f64], q_lf: Option<f64>) -> Result<f64> {
        self.net.forward_first(&self.map.encode(theta, q_lf)?)
    }
}

impl Surrogate for TargetSurrogate {
    fn predict(&self, theta: &[f64]) -> Result<f64> {
        self.predict_with_lf(theta, None)
    }
}

/// MFNN network bundled with the low-fidelity model it needs at query time.
#[derive(Clone)]
pub struct MfnnSurrogate {
    pub target: TargetSurrogate,
    pub lf: Evaluator,
}

impl fmt::Debug for MfnnSurrogate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MfnnSurrogate").field("target", &self.target).finish_non_exhaustive()
    }
}

impl Surrogate for MfnnSurrogate {
    fn predict(&self, theta: &[f64]) -> Result<f64> {
        self.target.predict_with_lf(theta, Some((self.lf)(theta)?))
    }
}

#[derive(Clone)]
pub enum LfSource {
    /// Network trained on `Q_LF`.
    Network(TargetSurrogate),
    /// The low-fidelity model itself.
    Direct(Evaluator),
}

impl LfSource {
    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        match self {
            LfSource::Network(t) => t.predict(theta),
            LfSource::Direct(f) => f(theta),
        }
    }
}

/// `lf(theta) + residual(theta, lf(theta))`.
#[derive(Clone)]
pub struct CompositeSurrogate {
    pub lf_source: LfSource,
    pub residual: ResidualSurrogate,
}

impl fmt::Debug for CompositeSurrogate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let src = match &self.lf_source {
            LfSource::Network(_) => "network",
            LfSource::Direct(_) => "direct",
        };
        f.debug_struct("CompositeSurrogate")
            .field("lf_source", &src)
            .field("residual", &self.residual)
            .finish()
    }
}

impl Surrogate for CompositeSurrogate {
    fn predict(&self, theta: &[f64]) -> Result<f64> {
        rmfnn_alt_predict(self, theta)
    }
}

pub fn rmfnn_alt_predict(c: &CompositeSurrogate, theta: &[f64]) -> Result<f64> {
    let q_lf = c.lf_source.eval(theta)?;
    Ok(q_lf + c.residual.residual(theta, q_lf)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn lf_scaling_handles_constant_channel() {
        let s = LfScaling::fit([2.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.apply(2.0), 0.0);
        let s = LfScaling::fit([1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.apply(2.0), 0.5);
        assert!(LfScaling::fit(Vec::<f64>::new()).is_err());
    }

    #[test]
    fn resnet_architecture() {
        let a = Architecture::resnet(7, 7);
        assert_eq!(a.hidden_widths, vec![7; 6]);
        assert!(a.spec(5, 0).validate().is_ok());
    }

    #[test]
    fn zero_residual_composite_returns_lf() {
        let domain = Domain::unit(1);
        let net = Network::zeros(&Architecture::dense(2, 3).spec(2, 0)).unwrap();
        let residual = ResidualSurrogate {
            net,
            map: InputMap::with_lf(domain, LfScaling { min: 0.0, scale: 1.0 }),
        };
        let lf: Evaluator = Arc::new(|t: &[f64]| Ok(3.0 * t[0]));
        let c = CompositeSurrogate {
            lf_source: LfSource::Direct(lf),
            residual,
        };
        assert_eq!(c.predict(&[0.25]).unwrap(), 0.75);
    }

    #[test]
    fn exact_residual_recovers_high_fidelity() {
        // lf = theta, hf = 2 theta: the residual is theta, read off the first input
        let domain = Domain::unit(1);
        let spec = NetworkSpec::new(2, vec![], 1);
        let net = Network::from_parts(spec, vec![vec![1.0, 0.0]], vec![vec![0.0]]).unwrap();
        let residual = ResidualSurrogate {
            net,
            map: InputMap::with_lf(domain, LfScaling { min: 0.0, scale: 1.0 }),
        };
        let lf: Evaluator = Arc::new(|t: &[f64]| Ok(t[0]));
        let c = CompositeSurrogate {
            lf_source: LfSource::Direct(lf),
            residual,
        };
        for t in [0.0, 0.125, 0.5, 1.0] {
            assert_eq!(c.predict(&[t]).unwrap(), 2.0 * t);
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Rmfnn, Method::RmfnnAlt, Method::Mfnn, Method::Hfnn, Method::Hfm] {
            assert_eq!(Method::parse(m.name()).unwrap(), m);
        }
    }
}
