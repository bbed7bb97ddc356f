//! Forced wave equation `u_tt - Laplace(u) = f` on `[-1, 1]^2` with Dirichlet
//! data, solved by explicit leapfrog on a uniform grid with `dt = h / 2`.

use std::time::Instant;

use super::SolverStats;
use crate::error::{Error, Result};

pub const WAVE_T: f64 = 30.0;
pub const WAVE_XQ: [f64; 2] = [0.5, 0.5];
pub const WAVE_LOWER: [f64; 2] = [10.0, 4.0];
pub const WAVE_UPPER: [f64; 2] = [11.0, 6.0];

/// Initial, boundary and forcing data for one solve.
pub trait WaveData {
    fn initial(&self, x: f64, y: f64) -> f64;
    fn velocity(&self, x: f64, y: f64) -> f64;
    fn boundary(&self, t: f64, x: f64, y: f64) -> f64;
    fn forcing(&self, t: f64, x: f64, y: f64) -> f64;

    /// Forcing on the full tensor grid, `out[j * nodes.len() + i] = f(t, nodes[i], nodes[j])`.
    fn forcing_field(&self, t: f64, nodes: &[f64], out: &mut [f64]) {
        let m = nodes.len();
        for (j, &y) in nodes.iter().enumerate() {
            for (i, &x) in nodes.iter().enumerate() {
                out[j * m + i] = self.forcing(t, x, y);
            }
        }
    }
}

/// Manufactured solution `u = sin(theta_1 t - theta_2 x) sin(theta_2 y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedWave {
    pub theta1: f64,
    pub theta2: f64,
}

impl ManufacturedWave {
    pub fn new(theta: &[f64]) -> Self {
        Self {
            theta1: theta[0],
            theta2: theta[1],
        }
    }

    pub fn solution(&self, t: f64, x: f64, y: f64) -> f64 {
        (self.theta1 * t - self.theta2 * x).sin() * (self.theta2 * y).sin()
    }

    fn forcing_scale(&self) -> f64 {
        2.0 * self.theta2 * self.theta2 - self.theta1 * self.theta1
    }
}

impl WaveData for ManufacturedWave {
    fn initial(&self, x: f64, y: f64) -> f64 {
        self.solution(0.0, x, y)
    }

    fn velocity(&self, x: f64, y: f64) -> f64 {
        self.theta1 * (self.theta2 * x).cos() * (self.theta2 * y).sin()
    }

    fn boundary(&self, t: f64, x: f64, y: f64) -> f64 {
        self.solution(t, x, y)
    }

    fn forcing(&self, t: f64, x: f64, y: f64) -> f64 {
        self.forcing_scale() * self.solution(t, x, y)
    }

    fn forcing_field(&self, t: f64, nodes: &[f64], out: &mut [f64]) {
        // sin(a t - b x) = sin(a t) cos(b x) - cos(a t) sin(b x), separable per axis
        let (st, ct) = (self.theta1 * t).sin_cos();
        let c = self.forcing_scale();
        let m = nodes.len();
        let along_x: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                let (sx, cx) = (self.theta2 * x).sin_cos();
                st * cx - ct * sx
            })
            .collect();
        for (j, &y) in nodes.iter().enumerate() {
            let sy = c * (self.theta2 * y).sin();
            for (o, ax) in out[j * m..(j + 1) * m].iter_mut().zip(&along_x) {
                *o = ax * sy;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveProblem {
    pub t_final: f64,
    pub x_q: [f64; 2],
}

impl Default for WaveProblem {
    fn default() -> Self {
        Self {
            t_final: WAVE_T,
            x_q: WAVE_XQ,
        }
    }
}

/// Cells per axis for grid length `h` on `[-1, 1]`.
pub fn wave_cells(h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::arg(format!("grid length must be positive, got {h}")));
    }
    let n = (2.0 / h).round();
    if n < 2.0 || (n * h - 2.0).abs() > 2e-9 {
        return Err(Error::arg(format!("grid length {h} does not divide the interval [-1, 1]")));
    }
    Ok(n as usize)
}

impl WaveProblem {
    pub fn exact(&self, theta: &[f64]) -> f64 {
        let w = ManufacturedWave::new(theta);
        w.solution(self.t_final, self.x_q[0], self.x_q[1]).abs()
    }

    /// `|u_h(T, x_Q)|` and solver statistics.
    pub fn solve(&self, data: &impl WaveData, h: f64) -> Result<(f64, SolverStats)> {
        let start = Instant::now();
        let n = wave_cells(h)?;
        let h = 2.0 / n as f64;
        let dt = 0.5 * h;
        let steps_f = (self.t_final / dt).round();
        if (steps_f * dt - self.t_final).abs() > 1e-9 * self.t_final.max(1.0) {
            return Err(Error::arg(format!("T = {} is not a multiple of dt = {dt}", self.t_final)));
        }
        let steps = steps_f as usize;
        let m = n + 1;
        let nodes: Vec<f64> = (0..m).map(|i| -1.0 + i as f64 * h).collect();
        let idx = |i: usize, j: usize| j * m + i;

        let mut prev = vec![0.0; m * m];
        for (j, &y) in nodes.iter().enumerate() {
            for (i, &x) in nodes.iter().enumerate() {
                prev[idx(i, j)] = data.initial(x, y);
            }
        }
        let mut cur = prev.clone();
        let mut next = vec![0.0; m * m];
        let mut force = vec![0.0; m * m];
        let r = dt * dt / (h * h);
        let lap = |u: &[f64], k: usize| u[k - 1] + u[k + 1] + u[k - m] + u[k + m] - 4.0 * u[k];

        let set_boundary = |u: &mut [f64], t: f64| {
            for (k, &s) in nodes.iter().enumerate() {
                u[idx(k, 0)] = data.boundary(t, s, -1.0);
                u[idx(k, n)] = data.boundary(t, s, 1.0);
                u[idx(0, k)] = data.boundary(t, -1.0, s);
                u[idx(n, k)] = data.boundary(t, 1.0, s);
            }
        };

        if steps >= 1 {
            data.forcing_field(0.0, &nodes, &mut force);
            for j in 1..n {
                for i in 1..n {
                    let k = idx(i, j);
                    cur[k] = prev[k]
                        + dt * data.velocity(nodes[i], nodes[j])
                        + 0.5 * (r * lap(&prev, k) + dt * dt * force[k]);
                }
            }
            set_boundary(&mut cur, dt);
        }
        for step in 1..steps {
            let t = step as f64 * dt;
            data.forcing_field(t, &nodes, &mut force);
            for j in 1..n {
                let row = j * m;
                for k in row + 1..row + n {
                    next[k] = 2.0 * cur[k] - prev[k] + r * lap(&cur, k) + dt * dt * force[k];
                }
            }
            set_boundary(&mut next, t + dt);
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }

        let field = if steps == 0 { &prev } else { &cur };
        let (value, interpolated) = read_point(field, m, h, self.x_q);
        let stats = SolverStats {
            wall_time_s: start.elapsed().as_secs_f64(),
            steps: steps as u64,
            grid_nodes: (m * m) as u64,
            interpolated,
        };
        Ok((value.abs(), stats))
    }
}

/// Nodal value when `x` sits on the grid, bilinear interpolation otherwise.
fn read_point(u: &[f64], m: usize, h: f64, x: [f64; 2]) -> (f64, bool) {
    let px = (x[0] + 1.0) / h;
    let py = (x[1] + 1.0) / h;
    let on_node = |p: f64| (p - p.round()).abs() < 1e-9;
    if on_node(px) && on_node(py) {
        return (u[py.round() as usize * m + px.round() as usize], false);
    }
    let i = (px.floor() as usize).min(m - 2);
    let j = (py.floor() as usize).min(m - 2);
    let (fx, fy) = (px - i as f64, py - j as f64);
    let at = |i: usize, j: usize| u[j * m + i];
    let v = (1.0 - fx) * (1.0 - fy) * at(i, j)
        + fx * (1.0 - fy) * at(i + 1, j)
        + (1.0 - fx) * fy * at(i, j + 1)
        + fx * fy * at(i + 1, j + 1);
    (v, true)
}

pub fn wave_exact(theta: &[f64]) -> f64 {
    WaveProblem::default().exact(theta)
}

pub fn wave_fd(theta: &[f64], h: f64) -> Result<(f64, SolverStats)> {
    WaveProblem::default().solve(&ManufacturedWave::new(theta), h)
}
