use serde::{Deserialize, Serialize};

use super::{Gradients, Network};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new(net: &Network) -> Self {
        let shapes: Vec<usize> = net
            .layers()
            .iter()
            .flat_map(|l| [l.weights().len(), l.biases().len()])
            .collect();
        Self {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

pub fn adam_step(net: &mut Network, grads: &Gradients, state: &mut AdamState, lr: f64, params: &AdamParams) {
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - params.beta1.powi(t);
    let c2 = 1.0 - params.beta2.powi(t);
    let mut slot = 0;
    for (l, layer) in net.layers_mut().iter_mut().enumerate() {
        let (w, b) = layer.params_mut();
        for (params_slice, g) in [(w, &grads.weights[l]), (b, &grads.biases[l])] {
            let m = &mut state.m[slot];
            let v = &mut state.v[slot];
            for k in 0..params_slice.len() {
                m[k] = params.beta1 * m[k] + (1.0 - params.beta1) * g[k];
                v[k] = params.beta2 * v[k] + (1.0 - params.beta2) * g[k] * g[k];
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                params_slice[k] -= lr * m_hat / (v_hat.sqrt() + params.eps);
            }
            slot += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NetworkSpec;

    fn net_and_grads(seed: u64) -> (Network, Gradients) {
        let net = Network::init(&NetworkSpec::uniform(2, 3, 1, 1).with_seed(seed)).unwrap();
        let mut g = Gradients::zeros_like(&net);
        for (l, gl) in g.weights.iter_mut().enumerate() {
            for (k, v) in gl.iter_mut().enumerate() {
                *v = ((l * 7 + k) as f64 - 4.5) * 0.01;
            }
        }
        for gb in g.biases.iter_mut() {
            gb.iter_mut().enumerate().for_each(|(k, v)| *v = 0.3 - k as f64 * 0.2);
        }
        (net, g)
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let (mut net, g) = net_and_grads(1);
        let before = net.clone();
        let lr = 1e-3;
        let mut st = AdamState::new(&net);
        adam_step(&mut net, &g, &mut st, lr, &AdamParams::default());
        for (l, (a, b)) in net.layers().iter().zip(before.layers()).enumerate() {
            for (k, (x, y)) in a.weights().iter().zip(b.weights()).enumerate() {
                let gk: f64 = g.weights[l][k];
                let expected = -lr * gk.signum();
                assert!(((x - y) - expected).abs() <= lr * 1e-5, "{} vs {expected}", x - y);
            }
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let (mut net, _) = net_and_grads(2);
        let before = net.clone();
        let zero = Gradients::zeros_like(&net);
        let mut st = AdamState::new(&net);
        adam_step(&mut net, &zero, &mut st, 0.1, &AdamParams::default());
        assert_eq!(net, before);
    }

    #[test]
    fn matches_scripted_recurrence() {
        // scalar Adam written out by hand for three steps on one parameter
        let p = AdamParams::default();
        let gs = [0.5, -0.2, 0.1];
        let lr = 0.01;
        let (mut m, mut v, mut x) = (0.0f64, 0.0f64, 1.0f64);
        for (i, g) in gs.iter().enumerate() {
            let t = (i + 1) as i32;
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            x -= lr * (m / (1.0 - 0.9f64.powi(t))) / ((v / (1.0 - 0.999f64.powi(t))).sqrt() + 1e-8);
        }
        let spec = NetworkSpec::new(1, vec![], 1);
        let mut net = Network::from_parts(spec, vec![vec![1.0]], vec![vec![0.0]]).unwrap();
        let mut st = AdamState::new(&net);
        for g in gs {
            let grads = Gradients {
                weights: vec![vec![g]],
                biases: vec![vec![0.0]],
                loss: 0.0,
            };
            adam_step(&mut net, &grads, &mut st, lr, &p);
        }
        assert_eq!(net.layers()[0].weights()[0], x);
    }

    #[test]
    fn state_matters() {
        let (net0, g) = net_and_grads(3);
        let mut twice = net0.clone();
        let mut st = AdamState::new(&twice);
        adam_step(&mut twice, &g, &mut st, 0.01, &AdamParams::default());
        adam_step(&mut twice, &g, &mut st, 0.01, &AdamParams::default());
        let mut doubled = net0.clone();
        let mut g2 = g.clone();
        g2.weights.iter_mut().flatten().for_each(|v| *v *= 2.0);
        g2.biases.iter_mut().flatten().for_each(|v| *v *= 2.0);
        adam_step(&mut doubled, &g2, &mut AdamState::new(&net0), 0.01, &AdamParams::default());
        assert_ne!(twice, doubled);
        assert_eq!(st.steps(), 2);
    }
}
