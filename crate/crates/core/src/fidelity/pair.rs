use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{
    self, check_dim, damped_hf, damped_lf, ivp_rk2, pulsed_asymptotic, pulsed_exact, wave_fd, Domain, ProblemId,
};

pub type Evaluator = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

/// Coarse and fine discretization parameters of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub h_hf: f64,
    pub h_lf: f64,
    /// Order of accuracy `q` of both discretizations.
    pub order_q: f64,
}

impl Discretization {
    /// `s = h_LF / h_HF`.
    pub fn ratio_s(&self) -> f64 {
        self.h_lf / self.h_hf
    }
}

/// Low- and high-fidelity evaluators of one quantity of interest.
#[derive(Clone)]
pub struct FidelityPair {
    pub name: String,
    pub domain: Domain,
    q_lf: Evaluator,
    q_hf: Evaluator,
    /// Present when both models are discretizations of the same equation.
    pub discretization: Option<Discretization>,
    /// Mean seconds per low-fidelity call, as last measured.
    pub cost_lf_s: f64,
    pub cost_hf_s: f64,
    /// Skip the domain check, for analytic test cases.
    pub allow_out_of_domain: bool,
}

impl fmt::Debug for FidelityPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FidelityPair")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("discretization", &self.discretization)
            .field("cost_lf_s", &self.cost_lf_s)
            .field("cost_hf_s", &self.cost_hf_s)
            .finish_non_exhaustive()
    }
}

impl FidelityPair {
    pub fn new(name: impl Into<String>, domain: Domain, q_lf: Evaluator, q_hf: Evaluator) -> Result<Self> {
        domain.validate()?;
        Ok(Self {
            name: name.into(),
            domain,
            q_lf,
            q_hf,
            discretization: None,
            cost_lf_s: 0.0,
            cost_hf_s: 0.0,
            allow_out_of_domain: false,
        })
    }

    pub fn with_discretization(mut self, disc: Discretization) -> Result<Self> {
        if !(disc.h_hf > 0.0 && disc.h_lf > disc.h_hf) {
            return Err(Error::arg(format!(
                "need 0 < h_HF < h_LF, got h_HF = {}, h_LF = {}",
                disc.h_hf, disc.h_lf
            )));
        }
        if !(disc.order_q > 0.0) {
            return Err(Error::arg("order q must be positive"));
        }
        self.discretization = Some(disc);
        Ok(self)
    }

    /// Forward Euler at step `dt` against the leading-order asymptotic solution.
    pub fn damped(dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::arg(format!("time step must be positive, got {dt}")));
        }
        Self::new(
            "damped-oscillator",
            ProblemId::DampedOscillator.domain(),
            Arc::new(|th: &[f64]| Ok(damped_lf(th[0]))),
            Arc::new(move |th: &[f64]| damped_hf(th[0], dt)),
        )
    }

    /// Closed-form solution against the leading-order asymptotic solution.
    pub fn pulsed() -> Self {
        Self::new(
            "pulsed-oscillator",
            ProblemId::PulsedOscillator.domain(),
            Arc::new(|th: &[f64]| Ok(pulsed_asymptotic(th))),
            Arc::new(|th: &[f64]| Ok(pulsed_exact(th))),
        )
        .expect("static domain is valid")
    }

    /// Midpoint-rule solves with steps `h_hf` and `h_lf`.
    pub fn ivp(h_hf: f64, h_lf: f64) -> Result<Self> {
        problems::ivp_steps(h_hf)?;
        problems::ivp_steps(h_lf)?;
        Self::new(
            "parametric-ivp",
            ProblemId::ParametricIvp.domain(),
            Arc::new(move |th: &[f64]| ivp_rk2(th[0], h_lf)),
            Arc::new(move |th: &[f64]| ivp_rk2(th[0], h_hf)),
        )?
        .with_discretization(Discretization {
            h_hf,
            h_lf,
            order_q: 2.0,
        })
    }

    /// Leapfrog solves on grids of length `h_hf` and `h_lf`.
    pub fn wave(h_hf: f64, h_lf: f64) -> Result<Self> {
        problems::wave_cells(h_hf)?;
        problems::wave_cells(h_lf)?;
        Self::new(
            "wave-ibvp",
            ProblemId::WaveIbvp.domain(),
            Arc::new(move |th: &[f64]| wave_fd(th, h_lf).map(|(q, _)| q)),
            Arc::new(move |th: &[f64]| wave_fd(th, h_hf).map(|(q, _)| q)),
        )?
        .with_discretization(Discretization {
            h_hf,
            h_lf,
            order_q: 2.0,
        })
    }

    /// The natural pair for `problem`; `h_hf`/`h_lf` are ignored where a model is analytic.
    pub fn for_problem(problem: ProblemId, h_hf: f64, h_lf: f64) -> Result<Self> {
        match problem {
            ProblemId::DampedOscillator => Self::damped(h_hf),
            ProblemId::PulsedOscillator => Ok(Self::pulsed()),
            ProblemId::ParametricIvp => Self::ivp(h_hf, h_lf),
            ProblemId::WaveIbvp => Self::wave(h_hf, h_lf),
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        check_dim(theta, self.dim())?;
        if !self.allow_out_of_domain && !self.domain.contains(theta) {
            return Err(Error::OutOfDomain { theta: theta.to_vec() });
        }
        Ok(())
    }

    fn wrap(theta: &[f64], r: Result<f64>) -> Result<f64> {
        match r {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(Error::Evaluation {
                theta: theta.to_vec(),
                source: Box::new(Error::arg(format!("model returned {v}"))),
            }),
            Err(e) => Err(Error::Evaluation {
                theta: theta.to_vec(),
                source: Box::new(e),
            }),
        }
    }

    pub fn lf(&self, theta: &[f64]) -> Result<f64> {
        self.check(theta)?;
        Self::wrap(theta, (self.q_lf)(theta))
    }

    pub fn hf(&self, theta: &[f64]) -> Result<f64> {
        self.check(theta)?;
        Self::wrap(theta, (self.q_hf)(theta))
    }

    pub fn lf_evaluator(&self) -> Evaluator {
        self.q_lf.clone()
    }

    pub fn hf_evaluator(&self) -> Evaluator {
        self.q_hf.clone()
    }

    /// Mean wall time per call over `repeats` passes through `points`, for both models.
    pub fn measure_costs(&mut self, points: &[Vec<f64>], repeats: usize) -> Result<(f64, f64)> {
        if points.is_empty() || repeats == 0 {
            return Err(Error::EmptyData("cost measurement needs points and repeats".into()));
        }
        let calls = (points.len() * repeats) as f64;
        let start = Instant::now();
        for _ in 0..repeats {
            for p in points {
                std::hint::black_box(self.lf(p)?);
            }
        }
        self.cost_lf_s = start.elapsed().as_secs_f64() / calls;
        let start = Instant::now();
        for _ in 0..repeats {
            for p in points {
                std::hint::black_box(self.hf(p)?);
            }
        }
        self.cost_hf_s = start.elapsed().as_secs_f64() / calls;
        Ok((self.cost_lf_s, self.cost_hf_s))
    }
}

/// `(1 + s^q) eps`, the bound on `|Q_HF - Q_LF|` when both models meet `c h^q <= eps`.
pub fn residual_bound(s: f64, q: f64, eps_tol: f64) -> Result<f64> {
    if !(s > 1.0 && q > 0.0 && eps_tol > 0.0) {
        return Err(Error::arg(format!(
            "residual bound needs s > 1, q > 0, eps > 0 (got s = {s}, q = {q}, eps = {eps_tol})"
        )));
    }
    Ok((1.0 + s.powf(q)) * eps_tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRatio {
    pub max_abs_f: f64,
    pub max_abs_q_hf: f64,
    pub ratio: f64,
}

/// Sup norms of `F = Q_HF - Q_LF` and `Q_HF` over `grid`.
pub fn residual_ratio(pair: &FidelityPair, grid: &[Vec<f64>]) -> Result<ResidualRatio> {
    use rayon::prelude::*;
    if grid.is_empty() {
        return Err(Error::EmptyData("residual ratio needs at least one point".into()));
    }
    let pairs: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|th| Ok(((pair.hf(th)? - pair.lf(th)?).abs(), pair.hf(th)?.abs())))
        .collect::<Result<_>>()?;
    let max_abs_f = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let max_abs_q_hf = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let ratio = if max_abs_q_hf > 0.0 { max_abs_f / max_abs_q_hf } else { 0.0 };
    Ok(ResidualRatio {
        max_abs_f,
        max_abs_q_hf,
        ratio,
    })
}
