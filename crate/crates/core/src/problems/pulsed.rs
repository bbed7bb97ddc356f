//! Pulsed harmonic oscillator `u_i' = a_i u_i + b_i cos(omega t)` with
//! `theta = (omega, t, b_1, b_2)` and `Q = |u(t)|`.

pub const PULSED_A: [f64; 2] = [-2.0, -0.25];
pub const PULSED_U0: [f64; 2] = [1.0, 20.0];
pub const PULSED_LOWER: [f64; 4] = [5.0, 0.0, 0.0, 4.0];
pub const PULSED_UPPER: [f64; 4] = [50.0, 6.0, 0.2, 4.5];

fn unpack(theta: &[f64]) -> (f64, f64, [f64; 2]) {
    (theta[0], theta[1], [theta[2], theta[3]])
}

/// Homogeneous decay plus the steady harmonic response, component by component.
pub fn pulsed_exact_state(theta: &[f64]) -> [f64; 2] {
    let (w, t, b) = unpack(theta);
    let (s, c) = (w * t).sin_cos();
    let mut u = [0.0; 2];
    for i in 0..2 {
        let a = PULSED_A[i];
        let d = w * w + a * a;
        u[i] = (a * t).exp() * (PULSED_U0[i] + a * b[i] / d) + b[i] * (w * s - a * c) / d;
    }
    u
}

pub fn pulsed_exact(theta: &[f64]) -> f64 {
    let u = pulsed_exact_state(theta);
    u[0].hypot(u[1])
}

/// First term of the high-frequency expansion: `e^{tA} u0 + sin(omega t)/omega b`.
pub fn pulsed_asymptotic(theta: &[f64]) -> f64 {
    let (w, t, b) = unpack(theta);
    let s = (w * t).sin() / w;
    let u1 = (PULSED_A[0] * t).exp() * PULSED_U0[0] + s * b[0];
    let u2 = (PULSED_A[1] * t).exp() * PULSED_U0[1] + s * b[1];
    u1.hypot(u2)
}
