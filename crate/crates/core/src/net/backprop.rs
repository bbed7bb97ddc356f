use super::{Dense, Network, Samples};
use crate::error::Result;

/// Gradient of [`super::loss`] with the same layer layout as the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    /// Loss value at the point of differentiation.
    pub loss: f64,
}

impl Gradients {
    pub(crate) fn zeros_like(net: &Network) -> Self {
        Self {
            weights: net.layers().iter().map(|l| vec![0.0; l.weights().len()]).collect(),
            biases: net.layers().iter().map(|l| vec![0.0; l.biases().len()]).collect(),
            loss: 0.0,
        }
    }
}

pub(crate) struct Workspace {
    scratch: super::Scratch,
    accum: Vec<Vec<f64>>,
    delta: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(net: &Network) -> Self {
        let widest = net.spec().hidden_widths.iter().copied().max().unwrap_or(0);
        Self {
            scratch: net.scratch(),
            accum: net.spec().hidden_widths.iter().map(|&w| vec![0.0; w]).collect(),
            delta: vec![0.0; widest.max(net.output_dim())],
        }
    }
}

/// Backpropagate MSE + `lambda * sum W^2` over `batch`.
pub fn gradients(net: &Network, batch: &Samples, lambda: f64) -> Result<Gradients> {
    batch.check_against(net)?;
    let mut grads = Gradients::zeros_like(net);
    let mut ws = Workspace::new(net);
    let indices: Vec<usize> = (0..batch.len()).collect();
    accumulate(net, batch, &indices, lambda, &mut grads, &mut ws)?;
    Ok(grads)
}

/// Fill `grads` (overwriting) with the gradient over `batch[indices]`.
pub(crate) fn accumulate(
    net: &Network,
    batch: &Samples,
    indices: &[usize],
    lambda: f64,
    grads: &mut Gradients,
    ws: &mut Workspace,
) -> Result<()> {
    for g in grads.weights.iter_mut().chain(grads.biases.iter_mut()) {
        g.fill(0.0);
    }
    let spec = net.spec();
    let hidden = spec.hidden_widths.len();
    let layers = net.layers();
    let scale = 2.0 / (indices.len() * net.output_dim()) as f64;
    let mut sq = 0.0;

    for &i in indices {
        let x = batch.input(i);
        let y = batch.target(i);
        net.forward_with(x, &mut ws.scratch)?;

        let out = &layers[hidden];
        let d_out = &mut ws.delta[..out.rows()];
        for ((d, p), t) in d_out.iter_mut().zip(&ws.scratch.out).zip(y) {
            let r = p - t;
            sq += r * r;
            *d = scale * r;
        }
        let last_in: &[f64] = if hidden == 0 { x } else { &ws.scratch.act[hidden - 1] };
        outer_add(&mut grads.weights[hidden], &mut grads.biases[hidden], d_out, last_in);
        if hidden == 0 {
            continue;
        }
        for a in ws.accum.iter_mut() {
            a.fill(0.0);
        }
        transpose_mul_add(out, d_out, &mut ws.accum[hidden - 1]);

        for j in (0..hidden).rev() {
            let width = layers[j].rows();
            let dz = &mut ws.delta[..width];
            for ((d, a), z) in dz.iter_mut().zip(&ws.accum[j]).zip(&ws.scratch.pre[j]) {
                *d = if *z > 0.0 { *a } else { 0.0 };
            }
            let input: &[f64] = if j == 0 { x } else { &ws.scratch.act[j - 1] };
            outer_add(&mut grads.weights[j], &mut grads.biases[j], dz, input);
            if j > 0 {
                let (lo, _) = ws.accum.split_at_mut(j);
                transpose_mul_add(&layers[j], dz, &mut lo[j - 1]);
            }
            if let Some(src) = spec.skip_source(j) {
                let (lo, hi) = ws.accum.split_at_mut(j);
                for (s, a) in lo[src].iter_mut().zip(&hi[0]) {
                    *s += a;
                }
            }
        }
    }

    for (g, layer) in grads.weights.iter_mut().zip(layers) {
        for (gw, w) in g.iter_mut().zip(layer.weights()) {
            *gw += 2.0 * lambda * w;
        }
    }
    grads.loss = sq / (indices.len() * net.output_dim()) as f64 + lambda * net.weight_norm_sq();
    Ok(())
}

#[inline]
fn outer_add(gw: &mut [f64], gb: &mut [f64], delta: &[f64], input: &[f64]) {
    let cols = input.len();
    for (r, &d) in delta.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        gb[r] += d;
        for (g, x) in gw[r * cols..(r + 1) * cols].iter_mut().zip(input) {
            *g += d * x;
        }
    }
}

#[inline]
fn transpose_mul_add(layer: &Dense, delta: &[f64], out: &mut [f64]) {
    let cols = layer.cols();
    for (r, &d) in delta.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        for (o, w) in out.iter_mut().zip(&layer.weights()[r * cols..(r + 1) * cols]) {
            *o += d * w;
        }
    }
}
