use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::backprop::{accumulate, Workspace};
use super::{adam_step, mse, AdamParams, AdamState, Gradients, Network, NetworkSpec, Samples};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub initial_lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub tikhonov_lambda: f64,
    pub validation_fraction: f64,
    pub plateau_patience: usize,
    pub plateau_factor: f64,
    pub min_lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            batch_size: 32,
            initial_lr: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            tikhonov_lambda: 1e-6,
            validation_fraction: 0.05,
            plateau_patience: 50,
            plateau_factor: 0.5,
            min_lr: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn new(epochs: usize, batch_size: usize, initial_lr: f64) -> Self {
        Self {
            epochs,
            batch_size,
            initial_lr,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::config("initial_lr must be positive"));
        }
        if !open_unit(self.adam_beta1) || !open_unit(self.adam_beta2) {
            return Err(Error::config("adam betas must lie in (0, 1)"));
        }
        if !(self.adam_eps > 0.0) {
            return Err(Error::config("adam_eps must be positive"));
        }
        if !(self.tikhonov_lambda >= 0.0) {
            return Err(Error::config("tikhonov_lambda must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::config("validation_fraction must lie in [0, 1)"));
        }
        if self.plateau_patience == 0 {
            return Err(Error::config("plateau_patience must be at least 1"));
        }
        if !open_unit(self.plateau_factor) {
            return Err(Error::config("plateau_factor must lie in (0, 1)"));
        }
        if !(self.min_lr > 0.0) {
            return Err(Error::config("min_lr must be positive"));
        }
        Ok(())
    }

    fn adam(&self) -> AdamParams {
        AdamParams {
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean data MSE over the training mini-batches of each epoch.
    pub train_loss_history: Vec<f64>,
    /// Validation MSE after each epoch; the training MSE when there is no validation split.
    pub val_loss_history: Vec<f64>,
    /// Learning rate used during each epoch.
    pub lr_history: Vec<f64>,
    pub epochs_run: usize,
    pub best_epoch: Option<usize>,
    pub best_val_loss: Option<f64>,
    pub n_train: usize,
    pub n_val: usize,
    pub wall_time_s: f64,
}

impl TrainReport {
    /// Equality on everything except wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        bits(&self.train_loss_history) == bits(&other.train_loss_history)
            && bits(&self.val_loss_history) == bits(&other.val_loss_history)
            && bits(&self.lr_history) == bits(&other.lr_history)
            && self.epochs_run == other.epochs_run
            && self.best_epoch == other.best_epoch
            && self.best_val_loss.map(f64::to_bits) == other.best_val_loss.map(f64::to_bits)
    }
}

/// Split sizes `(n_train, n_val)` for `n` records.
pub fn split_sizes(n: usize, fraction: f64) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(Error::EmptyData("training set has no records".into()));
    }
    let n_val = if fraction > 0.0 {
        ((fraction * n as f64).round() as usize).max(1)
    } else {
        0
    };
    if n_val >= n {
        return Err(Error::EmptyData(format!(
            "{n} records leave no training data after a validation split of {n_val}"
        )));
    }
    Ok((n - n_val, n_val))
}

/// Mini-batch Adam with reduce-on-plateau; returns the best-validation network.
pub fn train(data: &Samples, spec: &NetworkSpec, cfg: &TrainConfig) -> Result<(Network, TrainReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let mut net = Network::init(spec)?;
    data.check_against(&net)?;
    let (n_train, n_val) = split_sizes(data.len(), cfg.validation_fraction)?;
    if cfg.batch_size > n_train {
        return Err(Error::config(format!(
            "batch_size {} exceeds the {n_train} training records",
            cfg.batch_size
        )));
    }

    let mut shuffle_rng = rng::stream(cfg.seed, rng::STREAM_SHUFFLE);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut shuffle_rng);
    let mut train_idx = order[..n_train].to_vec();
    let val_set = data.subset(&order[n_train..]);

    let mut report = TrainReport {
        train_loss_history: Vec::new(),
        val_loss_history: Vec::new(),
        lr_history: Vec::new(),
        epochs_run: 0,
        best_epoch: None,
        best_val_loss: None,
        n_train,
        n_val,
        wall_time_s: 0.0,
    };
    if cfg.epochs == 0 {
        report.wall_time_s = start.elapsed().as_secs_f64();
        return Ok((net, report));
    }

    let adam = cfg.adam();
    let mut state = AdamState::new(&net);
    let mut grads = Gradients::zeros_like(&net);
    let mut ws = Workspace::new(&net);
    let mut lr = cfg.initial_lr;
    let mut best = f64::INFINITY;
    let mut best_net = net.clone();
    let mut since_best = 0usize;

    for epoch in 1..=cfg.epochs {
        train_idx.shuffle(&mut shuffle_rng);
        let mut sq_sum = 0.0;
        for chunk in train_idx.chunks(cfg.batch_size) {
            accumulate(&net, data, chunk, cfg.tikhonov_lambda, &mut grads, &mut ws)?;
            let data_mse = grads.loss - cfg.tikhonov_lambda * net.weight_norm_sq();
            if !grads.loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            sq_sum += data_mse * chunk.len() as f64;
            adam_step(&mut net, &grads, &mut state, lr, &adam);
        }
        let train_mse = sq_sum / n_train as f64;
        let monitored = if n_val > 0 { mse(&net, &val_set)? } else { train_mse };
        if !train_mse.is_finite() || !monitored.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }

        report.train_loss_history.push(train_mse.max(0.0));
        report.val_loss_history.push(monitored);
        report.lr_history.push(lr);
        report.epochs_run = epoch;

        if monitored < best {
            best = monitored;
            best_net.clone_from(&net);
            report.best_epoch = Some(epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.plateau_patience {
                lr *= cfg.plateau_factor;
                since_best = 0;
                if lr < cfg.min_lr {
                    break;
                }
            }
        }
    }

    report.best_val_loss = Some(best);
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((best_net, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_data(n: usize) -> Samples {
        let mut s = Samples::new(1, 1);
        for i in 0..n {
            let x = i as f64 / (n - 1) as f64;
            s.push(&[x], &[2.0 * x]).unwrap();
        }
        s
    }

    #[test]
    fn fits_a_line() {
        let spec = NetworkSpec::uniform(1, 10, 2, 1).with_seed(1);
        let cfg = TrainConfig::new(500, 20, 1e-3).with_seed(1);
        let (_, report) = train(&linear_data(200), &spec, &cfg).unwrap();
        assert!(report.best_val_loss.unwrap() < 1e-4, "{report:?}");
    }

    #[test]
    fn zero_epochs_returns_initial_network() {
        let spec = NetworkSpec::uniform(1, 4, 1, 1).with_seed(3);
        let (net, report) = train(&linear_data(10), &spec, &TrainConfig::new(0, 2, 1e-3)).unwrap();
        assert_eq!(net, Network::init(&spec).unwrap());
        assert!(report.train_loss_history.is_empty());
        assert_eq!(report.epochs_run, 0);
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = NetworkSpec::uniform(1, 6, 2, 1).with_seed(5);
        let cfg = TrainConfig::new(30, 8, 5e-3).with_seed(9);
        let (a, ra) = train(&linear_data(50), &spec, &cfg).unwrap();
        let (b, rb) = train(&linear_data(50), &spec, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(ra.same_outcome(&rb));
    }

    #[test]
    fn histories_have_matching_lengths() {
        let spec = NetworkSpec::uniform(1, 4, 1, 1).with_seed(2);
        let mut cfg = TrainConfig::new(40, 5, 1e-2);
        cfg.plateau_patience = 3;
        let (_, r) = train(&linear_data(30), &spec, &cfg).unwrap();
        assert_eq!(r.train_loss_history.len(), r.epochs_run);
        assert_eq!(r.val_loss_history.len(), r.epochs_run);
        assert_eq!(r.lr_history.len(), r.epochs_run);
        assert!(r.val_loss_history.iter().all(|&v| v >= 0.0));
        assert!(r.lr_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn more_epochs_never_worsen_best_validation() {
        let spec = NetworkSpec::uniform(1, 5, 2, 1).with_seed(8);
        let short = TrainConfig::new(25, 10, 3e-3).with_seed(4);
        let long = TrainConfig { epochs: 50, ..short.clone() };
        let (_, a) = train(&linear_data(60), &spec, &short).unwrap();
        let (_, b) = train(&linear_data(60), &spec, &long).unwrap();
        assert!(b.best_val_loss.unwrap() <= a.best_val_loss.unwrap());
    }

    #[test]
    fn oversized_batch_is_rejected() {
        let spec = NetworkSpec::uniform(1, 4, 1, 1);
        let cfg = TrainConfig::new(5, 100, 1e-3);
        assert!(matches!(train(&linear_data(20), &spec, &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn empty_data_is_rejected() {
        let spec = NetworkSpec::uniform(1, 4, 1, 1);
        assert!(train(&Samples::new(1, 1), &spec, &TrainConfig::new(5, 1, 1e-3)).is_err());
    }

    #[test]
    fn divergence_names_the_epoch() {
        let spec = NetworkSpec::uniform(1, 4, 1, 1);
        let mut data = linear_data(20);
        data.push(&[0.5], &[f64::INFINITY]).unwrap();
        let cfg = TrainConfig {
            validation_fraction: 0.0,
            ..TrainConfig::new(5, 21, 1e-3)
        };
        assert!(matches!(train(&data, &spec, &cfg), Err(Error::TrainingDiverged { epoch: 1 })));
    }
}
