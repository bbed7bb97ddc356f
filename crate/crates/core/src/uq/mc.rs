use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Domain;
use crate::rng::{self, STREAM_MC_BASE};
use crate::surrogate::Surrogate;

/// Number of independent sample streams an estimate is split into. Fixed, so
/// the result does not depend on the thread count.
pub const MC_SHARDS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_theta: u64,
    pub seed: u64,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0 {
            return self;
        }
        if self.n == 0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let w = o.n as f64 / n as f64;
        Moments {
            n,
            mean: self.mean + d * w,
            m2: self.m2 + o.m2 + d * d * self.n as f64 * w,
        }
    }
}

fn shard_range(n: u64, s: usize) -> (u64, u64) {
    let lo = (n as u128 * s as u128 / MC_SHARDS as u128) as u64;
    let hi = (n as u128 * (s as u128 + 1) / MC_SHARDS as u128) as u64;
    (lo, hi)
}

fn run_shard<S: Surrogate + ?Sized>(model: &S, domain: &Domain, n: u64, seed: u64, s: usize) -> Result<Moments> {
    let (lo, hi) = shard_range(n, s);
    let mut rng = rng::stream(seed, STREAM_MC_BASE + s as u64);
    let mut theta = vec![0.0; domain.dim()];
    let mut m = Moments::default();
    for _ in lo..hi {
        for (k, t) in theta.iter_mut().enumerate() {
            let u: f64 = rng.random();
            *t = domain.lower[k] + (domain.upper[k] - domain.lower[k]) * u;
        }
        let q = model.predict(&theta)?;
        if !q.is_finite() {
            return Err(Error::Evaluation {
                theta: theta.clone(),
                source: Box::new(Error::arg(format!("model returned {q}"))),
            });
        }
        m.push(q);
    }
    Ok(m)
}

fn finish(moments: Vec<Moments>, n_theta: u64, seed: u64) -> McEstimate {
    let m = moments.into_iter().fold(Moments::default(), Moments::merge);
    let var = m.m2.max(0.0) / (n_theta - 1) as f64;
    McEstimate {
        value: m.mean,
        stderr: (var / n_theta as f64).sqrt(),
        n_theta,
        seed,
    }
}

fn check_args(domain: &Domain, n_theta: u64) -> Result<()> {
    domain.validate()?;
    if n_theta < 2 {
        return Err(Error::arg(format!("need at least 2 samples, got {n_theta}")));
    }
    Ok(())
}

/// Sample mean of `model` over `n_theta` uniform draws from `domain`, with its standard error.
///
/// Shards run on the rayon pool; the result is bitwise identical to [`mc_estimate_serial`].
pub fn mc_estimate<S: Surrogate + ?Sized>(model: &S, domain: &Domain, n_theta: u64, seed: u64) -> Result<McEstimate> {
    check_args(domain, n_theta)?;
    let moments = (0..MC_SHARDS)
        .into_par_iter()
        .map(|s| run_shard(model, domain, n_theta, seed, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(moments, n_theta, seed))
}

/// Single-threaded [`mc_estimate`], for timing.
pub fn mc_estimate_serial<S: Surrogate + ?Sized>(
    model: &S,
    domain: &Domain,
    n_theta: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_args(domain, n_theta)?;
    let moments = (0..MC_SHARDS)
        .map(|s| run_shard(model, domain, n_theta, seed, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(moments, n_theta, seed))
}
