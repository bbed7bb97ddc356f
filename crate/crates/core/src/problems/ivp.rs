//! Scalar parametric IVP `u' + u/2 = f(t, theta)` on `[0, 100]` with the
//! manufactured solution `u = 1/2 + 2 sin(12 theta) + 6 sin(2t) sin(10 theta) (1 + 2 theta^2)`.

use crate::error::{Error, Result};

pub const IVP_T: f64 = 100.0;
pub const IVP_LOWER: f64 = -1.0;
pub const IVP_UPPER: f64 = 1.0;

pub fn ivp_solution(t: f64, theta: f64) -> f64 {
    0.5 + 2.0 * (12.0 * theta).sin() + 6.0 * (2.0 * t).sin() * (10.0 * theta).sin() * (1.0 + 2.0 * theta * theta)
}

pub fn ivp_initial(theta: f64) -> f64 {
    ivp_solution(0.0, theta)
}

pub fn ivp_forcing(t: f64, theta: f64) -> f64 {
    let u_t = 12.0 * (2.0 * t).cos() * (10.0 * theta).sin() * (1.0 + 2.0 * theta * theta);
    u_t + 0.5 * ivp_solution(t, theta)
}

pub fn ivp_exact(theta: f64) -> f64 {
    ivp_solution(IVP_T, theta).abs()
}

/// Number of steps of size `h` covering `[0, 100]`; `h` must divide 100.
pub fn ivp_steps(h: f64) -> Result<u64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::arg(format!("time step must be positive, got {h}")));
    }
    let n = (IVP_T / h).round();
    if n < 1.0 || (n * h - IVP_T).abs() > 1e-9 * IVP_T {
        return Err(Error::arg(format!("time step {h} does not divide T = {IVP_T}")));
    }
    Ok(n as u64)
}

/// Explicit midpoint rule for `u' = g(t, u)`, `n` steps of size `h`.
pub fn rk2_midpoint(g: impl Fn(f64, f64) -> f64, u0: f64, h: f64, n: u64) -> f64 {
    let mut u = u0;
    for k in 0..n {
        let t = k as f64 * h;
        let k1 = g(t, u);
        let k2 = g(t + 0.5 * h, u + 0.5 * h * k1);
        u += h * k2;
    }
    u
}

/// `|u_h(100)|` from the midpoint rule with step `h`.
pub fn ivp_rk2(theta: f64, h: f64) -> Result<f64> {
    let n = ivp_steps(h)?;
    let u = rk2_midpoint(|t, u| -0.5 * u + ivp_forcing(t, theta), ivp_initial(theta), h, n);
    Ok(u.abs())
}
