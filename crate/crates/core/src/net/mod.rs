//! Dense ReLU networks with optional identity shortcuts.
//!
//! A network with hidden widths `[N_1, .., N_{L-1}]` maps `x_0 = x` through
//!
//! ```text
//! x_l = relu(W_l x_{l-1} + b_l)            l = 1 .. L-1
//! x_L = W_L x_{L-1} + b_L                  (no activation on the output)
//! ```
//!
//! With `shortcut_period = p > 0`, hidden layers `l = 1 + p, 1 + 2p, ..` add
//! the output of layer `l - p` after their activation. The first hidden layer
//! is always a plain projection from the input.
//!
//! Matrices are stored row-major with shape `(rows, cols) = (N_l, N_{l-1})`.

mod adam;
mod backprop;
mod checkpoint;
mod loss;
mod train;

#[cfg(test)]
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub use adam::{adam_step, AdamParams, AdamState};
pub use backprop::{gradients, Gradients};
pub use checkpoint::{load_network, network_from_json, network_to_json, save_network};
pub use loss::{loss, mse};
pub use train::{split_sizes, train, TrainConfig, TrainReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden_widths: Vec<usize>,
    pub output_dim: usize,
    #[serde(default)]
    pub shortcut_period: usize,
    #[serde(default)]
    pub seed: u64,
}

impl NetworkSpec {
    pub fn new(input_dim: usize, hidden_widths: Vec<usize>, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_widths,
            output_dim,
            shortcut_period: 0,
            seed: 0,
        }
    }

    /// `depth` hidden layers of `width` neurons each.
    pub fn uniform(input_dim: usize, width: usize, depth: usize, output_dim: usize) -> Self {
        Self::new(input_dim, vec![width; depth], output_dim)
    }

    pub fn with_shortcuts(mut self, period: usize) -> Self {
        self.shortcut_period = period;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of weight layers, hidden plus output.
    pub fn num_layers(&self) -> usize {
        self.hidden_widths.len() + 1
    }

    /// Hidden layer (0-based) whose output is added to hidden layer `j`, if any.
    pub fn skip_source(&self, j: usize) -> Option<usize> {
        let p = self.shortcut_period;
        if p > 0 && j >= p && j % p == 0 && j < self.hidden_widths.len() {
            Some(j - p)
        } else {
            None
        }
    }

    /// `(rows, cols)` of every weight matrix, input layer first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(self.num_layers());
        let mut prev = self.input_dim;
        for &w in &self.hidden_widths {
            shapes.push((w, prev));
            prev = w;
        }
        shapes.push((self.output_dim, prev));
        shapes
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidSpec("input_dim must be at least 1".into()));
        }
        if self.output_dim == 0 {
            return Err(Error::InvalidSpec("output_dim must be at least 1".into()));
        }
        if let Some(pos) = self.hidden_widths.iter().position(|&w| w == 0) {
            return Err(Error::InvalidSpec(format!("hidden layer {pos} has zero width")));
        }
        for j in 0..self.hidden_widths.len() {
            if let Some(src) = self.skip_source(j) {
                let (a, b) = (self.hidden_widths[src], self.hidden_widths[j]);
                if a != b {
                    return Err(Error::InvalidSpec(format!(
                        "shortcut from hidden layer {src} (width {a}) to layer {j} (width {b}) joins unequal widths"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_shapes().iter().map(|(r, c)| r * c + r).sum()
    }
}

/// One affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            biases: vec![0.0; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    pub fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.weights, &mut self.biases)
    }

    #[inline]
    fn affine(&self, input: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            let mut acc = self.biases[r];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            *o = acc;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    layers: Vec<Dense>,
}

/// Reusable activation buffers for [`Network::forward_with`].
#[derive(Debug, Clone)]
pub struct Scratch {
    pub(crate) pre: Vec<Vec<f64>>,
    pub(crate) act: Vec<Vec<f64>>,
    pub(crate) out: Vec<f64>,
}

impl Network {
    /// He-initialized network: weights ~ N(0, 2 / fan_in), zero biases.
    pub fn init(spec: &NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = rng::stream(spec.seed, rng::STREAM_INIT);
        let layers = spec
            .layer_shapes()
            .into_iter()
            .map(|(rows, cols)| {
                let normal = Normal::new(0.0, (2.0 / cols as f64).sqrt()).expect("positive std");
                let weights = (0..rows * cols).map(|_| normal.sample(&mut rng)).collect();
                Dense {
                    rows,
                    cols,
                    weights,
                    biases: vec![0.0; rows],
                }
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            layers,
        })
    }

    /// Network with every weight and bias zero.
    pub fn zeros(spec: &NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let layers = spec
            .layer_shapes()
            .into_iter()
            .map(|(r, c)| Dense::zeros(r, c))
            .collect();
        Ok(Self {
            spec: spec.clone(),
            layers,
        })
    }

    /// Build from explicit row-major weights and biases, checking every shape.
    pub fn from_parts(spec: NetworkSpec, weights: Vec<Vec<f64>>, biases: Vec<Vec<f64>>) -> Result<Self> {
        spec.validate()?;
        let shapes = spec.layer_shapes();
        if weights.len() != shapes.len() || biases.len() != shapes.len() {
            return Err(Error::InvalidSpec(format!(
                "spec declares {} layers but {} weight and {} bias arrays were given",
                shapes.len(),
                weights.len(),
                biases.len()
            )));
        }
        let mut layers = Vec::with_capacity(shapes.len());
        for (l, ((rows, cols), (w, b))) in shapes.into_iter().zip(weights.into_iter().zip(biases)).enumerate() {
            if w.len() != rows * cols {
                return Err(Error::InvalidSpec(format!(
                    "layer {l}: declared shape {rows}x{cols} but weights have {} entries",
                    w.len()
                )));
            }
            if b.len() != rows {
                return Err(Error::InvalidSpec(format!(
                    "layer {l}: declared {rows} rows but biases have {} entries",
                    b.len()
                )));
            }
            if w.iter().chain(&b).any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpec(format!("layer {l} contains non-finite parameters")));
            }
            layers.push(Dense {
                rows,
                cols,
                weights: w,
                biases: b,
            });
        }
        Ok(Self { spec, layers })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim
    }

    /// Sum of squared weights (biases excluded), the Tikhonov penalty.
    pub fn weight_norm_sq(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter())
            .map(|w| w * w)
            .sum()
    }

    pub fn scratch(&self) -> Scratch {
        let hidden = &self.spec.hidden_widths;
        Scratch {
            pre: hidden.iter().map(|&w| vec![0.0; w]).collect(),
            act: hidden.iter().map(|&w| vec![0.0; w]).collect(),
            out: vec![0.0; self.spec.output_dim],
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut scratch = self.scratch();
        self.forward_with(x, &mut scratch).map(<[f64]>::to_vec)
    }

    /// Forward pass without allocation; activations stay in `scratch` for backprop.
    pub fn forward_with<'s>(&self, x: &[f64], scratch: &'s mut Scratch) -> Result<&'s [f64]> {
        if x.len() != self.spec.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.input_dim,
                actual: x.len(),
            });
        }
        let hidden = self.spec.hidden_widths.len();
        for j in 0..hidden {
            let (done, rest) = scratch.act.split_at_mut(j);
            let input: &[f64] = if j == 0 { x } else { &done[j - 1] };
            let pre = &mut scratch.pre[j];
            self.layers[j].affine(input, pre);
            let act = &mut rest[0];
            for (a, &z) in act.iter_mut().zip(pre.iter()) {
                *a = if z > 0.0 { z } else { 0.0 };
            }
            if let Some(src) = self.spec.skip_source(j) {
                for (a, s) in act.iter_mut().zip(&done[src]) {
                    *a += s;
                }
            }
        }
        let input: &[f64] = if hidden == 0 { x } else { &scratch.act[hidden - 1] };
        self.layers[hidden].affine(input, &mut scratch.out);
        Ok(&scratch.out)
    }

    /// Scalar output of a single-output network.
    pub fn predict_scalar(&self, x: &[f64], scratch: &mut Scratch) -> Result<f64> {
        Ok(self.forward_with(x, scratch)?[0])
    }

    /// First output for one input, with a single buffer allocation.
    pub fn forward_first(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.spec.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.input_dim,
                actual: x.len(),
            });
        }
        let widths = &self.spec.hidden_widths;
        let mut offsets = Vec::with_capacity(widths.len() + 1);
        offsets.push(0);
        for w in widths {
            offsets.push(offsets.last().unwrap() + w);
        }
        let mut acts = vec![0.0; *offsets.last().unwrap()];
        for j in 0..widths.len() {
            let (done, rest) = acts.split_at_mut(offsets[j]);
            let input: &[f64] = if j == 0 { x } else { &done[offsets[j - 1]..] };
            let out = &mut rest[..widths[j]];
            self.layers[j].affine(input, out);
            for a in out.iter_mut() {
                *a = if *a > 0.0 { *a } else { 0.0 };
            }
            if let Some(src) = self.spec.skip_source(j) {
                for (a, s) in out.iter_mut().zip(&done[offsets[src]..offsets[src + 1]]) {
                    *a += s;
                }
            }
        }
        let input: &[f64] = match widths.len() {
            0 => x,
            h => &acts[offsets[h - 1]..],
        };
        let last = &self.layers[widths.len()];
        let mut acc = last.biases[0];
        for (w, v) in last.weights[..last.cols].iter().zip(input) {
            acc += w * v;
        }
        Ok(acc)
    }

    #[cfg(test)]
    pub(crate) fn random_like(spec: &NetworkSpec, scale: f64, seed: u64) -> Result<Self> {
        let mut net = Self::init(spec)?;
        let mut rng = rng::stream(seed, 99);
        for layer in &mut net.layers {
            for b in &mut layer.biases {
                *b = scale * (rng.random::<f64>() - 0.5);
            }
        }
        Ok(net)
    }
}

/// Paired inputs and targets, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    input_dim: usize,
    output_dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl Samples {
    pub fn new(input_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            output_dim,
            inputs: Vec::new(),
            targets: Vec::new(),
        }
    }

    pub fn from_rows(inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<Self> {
        let first_in = inputs.first().ok_or_else(|| Error::EmptyData("no samples".into()))?;
        let first_out = targets.first().ok_or_else(|| Error::EmptyData("no targets".into()))?;
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                actual: targets.len(),
            });
        }
        let mut s = Self::new(first_in.len(), first_out.len());
        for (x, y) in inputs.iter().zip(targets) {
            s.push(x, y)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        if y.len() != self.output_dim {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim,
                actual: y.len(),
            });
        }
        self.inputs.extend_from_slice(x);
        self.targets.extend_from_slice(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inputs.len() / self.input_dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.output_dim..(i + 1) * self.output_dim]
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut s = Self::new(self.input_dim, self.output_dim);
        for &i in indices {
            s.inputs.extend_from_slice(self.input(i));
            s.targets.extend_from_slice(self.target(i));
        }
        s
    }

    pub(crate) fn check_against(&self, net: &Network) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyData("batch has no samples".into()));
        }
        if self.input_dim != net.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: net.input_dim(),
                actual: self.input_dim,
            });
        }
        if self.output_dim != net.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: net.output_dim(),
                actual: self.output_dim,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straight-line evaluator over nested row vectors, independent of `Dense::affine`.
    fn naive_forward(net: &Network, x: &[f64]) -> Vec<f64> {
        let spec = net.spec();
        let mats: Vec<Vec<Vec<f64>>> = net
            .layers()
            .iter()
            .map(|l| l.weights().chunks(l.cols()).map(<[f64]>::to_vec).collect())
            .collect();
        let mut outputs: Vec<Vec<f64>> = Vec::new();
        let mut cur = x.to_vec();
        for (j, _) in spec.hidden_widths.iter().enumerate() {
            let mut next = Vec::new();
            for (row, b) in mats[j].iter().zip(net.layers()[j].biases()) {
                let z: f64 = b + row.iter().zip(&cur).map(|(w, v)| w * v).sum::<f64>();
                next.push(z.max(0.0));
            }
            if let Some(src) = spec.skip_source(j) {
                for (n, s) in next.iter_mut().zip(&outputs[src]) {
                    *n += *s;
                }
            }
            outputs.push(next.clone());
            cur = next;
        }
        let last = mats.len() - 1;
        mats[last]
            .iter()
            .zip(net.layers()[last].biases())
            .map(|(row, b)| b + row.iter().zip(&cur).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    #[test]
    fn init_is_deterministic() {
        let spec = NetworkSpec::uniform(1, 10, 2, 1).with_seed(7);
        let a = Network::init(&spec).unwrap();
        let b = Network::init(&spec).unwrap();
        for (la, lb) in a.layers().iter().zip(b.layers()) {
            let wa: Vec<u64> = la.weights().iter().map(|w| w.to_bits()).collect();
            let wb: Vec<u64> = lb.weights().iter().map(|w| w.to_bits()).collect();
            assert_eq!(wa, wb);
        }
    }

    #[test]
    fn zero_width_is_rejected() {
        let spec = NetworkSpec::new(1, vec![0], 1);
        assert!(matches!(Network::init(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn shortcut_between_unequal_widths_is_rejected() {
        let spec = NetworkSpec::new(2, vec![4, 4, 5], 1).with_shortcuts(2);
        assert!(spec.validate().is_err());
        let ok = NetworkSpec::new(2, vec![3, 4, 4], 1).with_shortcuts(1);
        // period 1: layer 1 <- 0 (3 vs 4) mismatches
        assert!(ok.validate().is_err());
        assert!(NetworkSpec::new(2, vec![3, 4, 3], 1).with_shortcuts(2).validate().is_ok());
    }

    #[test]
    fn seven_by_seven_shapes() {
        let spec = NetworkSpec::uniform(4, 7, 6, 1);
        let net = Network::init(&spec).unwrap();
        let shapes: Vec<(usize, usize)> = net.layers().iter().map(|l| (l.rows(), l.cols())).collect();
        let mut expected = vec![(7, 4)];
        expected.extend(std::iter::repeat((7, 7)).take(5));
        expected.push((1, 7));
        assert_eq!(shapes, expected);
    }

    #[test]
    fn shortcut_placement_period_two() {
        let spec = NetworkSpec::uniform(4, 7, 6, 1).with_shortcuts(2);
        let skips: Vec<Option<usize>> = (0..6).map(|j| spec.skip_source(j)).collect();
        assert_eq!(skips, vec![None, None, Some(0), None, Some(2), None]);
    }

    #[test]
    fn relu_kills_negative_input() {
        let spec = NetworkSpec::new(1, vec![1], 1);
        let net = Network::from_parts(spec, vec![vec![1.0], vec![1.0]], vec![vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(net.forward(&[-2.0]).unwrap(), vec![0.0]);
        assert_eq!(net.forward(&[3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Network::zeros(&NetworkSpec::uniform(3, 5, 3, 2)).unwrap();
        assert_eq!(net.forward(&[1.0, -4.0, 2.5]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let net = Network::zeros(&NetworkSpec::uniform(3, 5, 1, 1)).unwrap();
        assert!(matches!(
            net.forward(&[1.0]),
            Err(Error::DimensionMismatch { expected: 3, actual: 1 })
        ));
    }

    #[test]
    fn forward_matches_naive_evaluator() {
        for (period, seed) in [(0, 1), (2, 2), (1, 3), (3, 4)] {
            let spec = NetworkSpec::new(3, vec![6, 6, 6, 6, 6, 6, 6], 2)
                .with_shortcuts(period)
                .with_seed(seed);
            let net = Network::random_like(&spec, 0.4, seed).unwrap();
            for k in 0..20 {
                let x = [0.3 * k as f64 - 2.0, (k as f64).sin(), 1.0 / (1.0 + k as f64)];
                let got = net.forward(&x).unwrap();
                let want = naive_forward(&net, &x);
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() <= 1e-12 * (1.0 + w.abs()), "{g} vs {w}");
                }
            }
        }
    }

    #[test]
    fn scalar_path_matches_forward_bitwise() {
        for period in [0, 2] {
            let spec = NetworkSpec::uniform(3, 6, 5, 1).with_shortcuts(period).with_seed(21);
            let net = Network::random_like(&spec, 0.5, 21).unwrap();
            for k in 0..50 {
                let x = [k as f64 * 0.1 - 2.0, (k as f64).cos(), 0.5];
                assert_eq!(net.forward(&x).unwrap()[0].to_bits(), net.forward_first(&x).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn single_layer_network_is_affine() {
        let spec = NetworkSpec::new(3, vec![], 2).with_seed(11);
        let net = Network::init(&spec).unwrap();
        let bias = net.forward(&[0.0; 3]).unwrap();
        assert_eq!(bias, net.layers()[0].biases());
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            let y = net.forward(&e).unwrap();
            for r in 0..2 {
                assert_eq!(y[r] - bias[r], net.layers()[0].weights()[r * 3 + i]);
            }
        }
    }

    #[test]
    fn zero_shortcut_block_is_identity_on_its_input() {
        // hidden layers 1 and 2 form the block fed by layer 0's output
        let spec = NetworkSpec::new(2, vec![3, 3, 3], 3).with_shortcuts(2).with_seed(5);
        let mut net = Network::init(&spec).unwrap();
        for l in 1..=2 {
            net.layers_mut()[l].weights_mut().fill(0.0);
            net.layers_mut()[l].biases_mut().fill(0.0);
        }
        let mut scratch = net.scratch();
        net.forward_with(&[0.7, -0.2], &mut scratch).unwrap();
        assert_eq!(scratch.act[2], scratch.act[0]);
    }
}
