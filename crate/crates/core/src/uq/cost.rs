use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-evaluation and training costs (seconds) together with the sample counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostInputs {
    pub w_hf: f64,
    #[serde(default)]
    pub w_lf: f64,
    /// One prediction of the deep network.
    pub w_dnn: f64,
    #[serde(default)]
    pub w_resnn: f64,
    /// Training time of the residual network.
    #[serde(default)]
    pub w_t1: f64,
    /// Training time of the deep network.
    #[serde(default)]
    pub w_t2: f64,
    pub n_i: u64,
    pub n: u64,
    pub n_theta: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostTotals {
    pub w_rmfnn: f64,
    pub w_hfm: f64,
    pub w_hfnn: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub inputs: CostInputs,
    pub without_training: CostTotals,
    pub with_training: CostTotals,
}

/// Total cost of the RMFNN estimator, the direct high-fidelity estimator and the HFNN estimator.
pub fn cost_totals(c: &CostInputs) -> Result<CostLedger> {
    for (name, v) in [
        ("w_hf", c.w_hf),
        ("w_lf", c.w_lf),
        ("w_dnn", c.w_dnn),
        ("w_resnn", c.w_resnn),
        ("w_t1", c.w_t1),
        ("w_t2", c.w_t2),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::arg(format!("{name} must be finite and non-negative, got {v}")));
        }
    }
    let (n_i, n, n_theta) = (c.n_i as f64, c.n as f64, c.n_theta as f64);
    let base = CostTotals {
        w_rmfnn: n_i * c.w_hf + n_theta * c.w_dnn,
        w_hfm: n_theta * c.w_hf,
        w_hfnn: n * c.w_hf + n_theta * c.w_dnn,
    };
    let trained = CostTotals {
        w_rmfnn: base.w_rmfnn + c.w_t1 + c.w_t2,
        w_hfm: base.w_hfm,
        w_hfnn: base.w_hfnn + c.w_t2,
    };
    Ok(CostLedger {
        inputs: *c,
        without_training: base,
        with_training: trained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_samples_and_free_network() {
        let c = CostInputs {
            w_hf: 2.0,
            w_dnn: 0.0,
            n_i: 3,
            n: 10,
            n_theta: 0,
            ..Default::default()
        };
        let l = cost_totals(&c).unwrap();
        assert_eq!(l.without_training.w_hfm, 0.0);
        assert_eq!(l.without_training.w_rmfnn, 6.0);
    }

    #[test]
    fn rejects_negative_costs() {
        let c = CostInputs {
            w_hf: -1.0,
            ..Default::default()
        };
        assert!(cost_totals(&c).is_err());
    }

    proptest! {
        #[test]
        fn homogeneous_in_costs(w_hf in 0.0f64..1.0, w_dnn in 0.0f64..1e-3, t1 in 0.0f64..10.0, t2 in 0.0f64..100.0,
                                n_i in 1u64..1000, extra in 1u64..10_000, n_theta in 0u64..10_000_000) {
            let c = CostInputs { w_hf, w_dnn, w_t1: t1, w_t2: t2, n_i, n: n_i + extra, n_theta, ..Default::default() };
            let d = CostInputs { w_hf: 2.0 * w_hf, w_dnn: 2.0 * w_dnn, w_t1: 2.0 * t1, w_t2: 2.0 * t2, ..c };
            let (a, b) = (cost_totals(&c).unwrap(), cost_totals(&d).unwrap());
            for (x, y) in [(a.with_training, b.with_training), (a.without_training, b.without_training)] {
                prop_assert_eq!(2.0 * x.w_rmfnn, y.w_rmfnn);
                prop_assert_eq!(2.0 * x.w_hfm, y.w_hfm);
                prop_assert_eq!(2.0 * x.w_hfnn, y.w_hfnn);
            }
        }
    }
}
