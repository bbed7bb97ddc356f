//! Forced oscillator with damping, `u' = A u + cos(theta t) b`, `Q = u_2(T)^2`.

use super::expm::{expm2, mat_vec, Mat2};
use crate::error::{Error, Result};

pub const DAMPED_A: Mat2 = [[0.0, 1.0], [-3.0, -3.0]];
pub const DAMPED_B: [f64; 2] = [0.0, 0.6];
pub const DAMPED_T: f64 = 1.0;
/// Initial state. Not pinned by the model description; zero is the default.
pub const DAMPED_U0: [f64; 2] = [0.0, 0.0];
pub const DAMPED_DT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedOscillator {
    pub a: Mat2,
    pub b: [f64; 2],
    pub u0: [f64; 2],
    pub t_final: f64,
}

impl Default for DampedOscillator {
    fn default() -> Self {
        Self {
            a: DAMPED_A,
            b: DAMPED_B,
            u0: DAMPED_U0,
            t_final: DAMPED_T,
        }
    }
}

impl DampedOscillator {
    fn rhs(&self, t: f64, theta: f64, u: [f64; 2]) -> [f64; 2] {
        let au = mat_vec(&self.a, u);
        let c = (theta * t).cos();
        [au[0] + c * self.b[0], au[1] + c * self.b[1]]
    }

    /// Forward Euler with step `dt`, forcing sampled at `t_k = k dt`. When `dt`
    /// does not divide `T` a final shorter step lands exactly on `T`.
    pub fn hf(&self, theta: f64, dt: f64) -> Result<f64> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::arg(format!("time step must be positive, got {dt}")));
        }
        let full = (self.t_final / dt * (1.0 + 1e-12)).floor() as u64;
        let mut u = self.u0;
        for k in 0..full {
            let f = self.rhs(k as f64 * dt, theta, u);
            u = [u[0] + dt * f[0], u[1] + dt * f[1]];
        }
        let rest = self.t_final - full as f64 * dt;
        if rest > 1e-12 * self.t_final {
            let f = self.rhs(full as f64 * dt, theta, u);
            u = [u[0] + rest * f[0], u[1] + rest * f[1]];
        }
        Ok(u[1] * u[1])
    }

    /// Leading-order asymptotic solution `e^{tA} u0 + sin(theta t)/theta b` at `T`.
    pub fn lf(&self, theta: f64) -> f64 {
        let t = self.t_final;
        let h = mat_vec(&expm2(&self.a, t), self.u0);
        let s = (theta * t).sin() / theta;
        let u2 = h[1] + s * self.b[1];
        u2 * u2
    }
}

pub fn damped_hf(theta: f64, dt: f64) -> Result<f64> {
    DampedOscillator::default().hf(theta, dt)
}

pub fn damped_lf(theta: f64) -> f64 {
    DampedOscillator::default().lf(theta)
}
