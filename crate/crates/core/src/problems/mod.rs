//! Parametric forward models with high- and low-fidelity evaluators.

mod damped;
mod expm;
mod ivp;
mod pulsed;
mod wave;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use damped::{damped_hf, damped_lf, DampedOscillator, DAMPED_A, DAMPED_B, DAMPED_DT, DAMPED_T, DAMPED_U0};
pub use expm::{expm2, Mat2};
pub use ivp::{
    ivp_exact, ivp_forcing, ivp_initial, ivp_rk2, ivp_solution, ivp_steps, rk2_midpoint, IVP_LOWER, IVP_T,
    IVP_UPPER,
};
pub use pulsed::{pulsed_asymptotic, pulsed_exact, pulsed_exact_state, PULSED_A, PULSED_LOWER, PULSED_U0, PULSED_UPPER};
pub use wave::{
    wave_cells, wave_exact, wave_fd, ManufacturedWave, WaveData, WaveProblem, WAVE_LOWER, WAVE_T, WAVE_UPPER,
    WAVE_XQ,
};

/// Per-solve cost and size figures.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub wall_time_s: f64,
    pub steps: u64,
    pub grid_nodes: u64,
    /// True when the QoI point fell between grid nodes.
    #[serde(default)]
    pub interpolated: bool,
}

/// Axis-aligned parameter box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let d = Self { lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(Error::arg(format!(
                "domain bounds have lengths {} and {}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        for (k, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::arg(format!("domain axis {k} is degenerate: [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (lo, hi))| *lo <= *t && *t <= *hi)
    }

    /// Affine map of `theta` into `[0, 1]^d`.
    pub fn to_unit(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(t, (lo, hi))| (t - lo) / (hi - lo))
            .collect()
    }

    pub fn from_unit(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(z, (lo, hi))| lo + z * (hi - lo))
            .collect()
    }

    /// Midpoint of each axis cell of a tensor grid with `m` cells per axis.
    pub fn midpoints(&self, m: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let total = m.pow(d as u32);
        (0..total)
            .map(|mut flat| {
                let mut z = vec![0.0; d];
                for k in (0..d).rev() {
                    z[k] = ((flat % m) as f64 + 0.5) / m as f64;
                    flat /= m;
                }
                self.from_unit(&z)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemId {
    DampedOscillator,
    PulsedOscillator,
    ParametricIvp,
    WaveIbvp,
}

impl ProblemId {
    pub const ALL: [ProblemId; 4] = [
        ProblemId::DampedOscillator,
        ProblemId::PulsedOscillator,
        ProblemId::ParametricIvp,
        ProblemId::WaveIbvp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::DampedOscillator => "damped-oscillator",
            ProblemId::PulsedOscillator => "pulsed-oscillator",
            ProblemId::ParametricIvp => "parametric-ivp",
            ProblemId::WaveIbvp => "wave-ibvp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "damped" | "damped-oscillator" => Ok(ProblemId::DampedOscillator),
            "pulsed" | "pulsed-oscillator" => Ok(ProblemId::PulsedOscillator),
            "ivp" | "parametric-ivp" => Ok(ProblemId::ParametricIvp),
            "wave" | "wave-ibvp" => Ok(ProblemId::WaveIbvp),
            other => Err(Error::arg(format!(
                "unknown problem '{other}' (expected damped, pulsed, ivp or wave)"
            ))),
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            ProblemId::DampedOscillator => boxed(&[10.0], &[50.0]),
            ProblemId::PulsedOscillator => boxed(&PULSED_LOWER, &PULSED_UPPER),
            ProblemId::ParametricIvp => boxed(&[IVP_LOWER], &[IVP_UPPER]),
            ProblemId::WaveIbvp => boxed(&WAVE_LOWER, &WAVE_UPPER),
        }
    }

    pub fn dim(self) -> usize {
        self.domain().dim()
    }

    /// Reference QoI: the closed form where one exists, the fine Euler solve otherwise.
    pub fn reference(self, theta: &[f64]) -> Result<f64> {
        check_dim(theta, self.dim())?;
        match self {
            ProblemId::DampedOscillator => damped_hf(theta[0], DAMPED_DT),
            ProblemId::PulsedOscillator => Ok(pulsed_exact(theta)),
            ProblemId::ParametricIvp => Ok(ivp_exact(theta[0])),
            ProblemId::WaveIbvp => Ok(wave_exact(theta)),
        }
    }
}

impl std::fmt::Display for ProblemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn boxed(lower: &[f64], upper: &[f64]) -> Domain {
    Domain {
        lower: lower.to_vec(),
        upper: upper.to_vec(),
    }
}

pub(crate) fn check_dim(theta: &[f64], dim: usize) -> Result<()> {
    if theta.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: theta.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_map() {
        let d = ProblemId::WaveIbvp.domain();
        assert_eq!(d.to_unit(&[10.5, 5.0]), vec![0.5, 0.5]);
        let u = Domain::unit(3);
        assert_eq!(u.to_unit(&[0.2, 0.7, 1.0]), vec![0.2, 0.7, 1.0]);
    }

    #[test]
    fn degenerate_domain_is_rejected() {
        assert!(Domain::new(vec![1.0], vec![1.0]).is_err());
        assert!(Domain::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }

    #[test]
    fn midpoint_grid_covers_cells() {
        let pts = Domain::unit(2).midpoints(4);
        assert_eq!(pts.len(), 16);
        assert_eq!(pts[0], vec![0.125, 0.125]);
        assert_eq!(pts[1], vec![0.125, 0.375]);
    }

    #[test]
    fn problem_names_parse() {
        for p in ProblemId::ALL {
            assert_eq!(ProblemId::parse(p.name()).unwrap(), p);
        }
        assert!(ProblemId::parse("heat").is_err());
    }

    #[test]
    fn evaluators_are_pure() {
        let th = [23.0, 2.5, 0.1, 4.2];
        assert_eq!(pulsed_exact(&th).to_bits(), pulsed_exact(&th).to_bits());
        assert_eq!(ivp_rk2(0.4, 0.5).unwrap().to_bits(), ivp_rk2(0.4, 0.5).unwrap().to_bits());
    }
}
