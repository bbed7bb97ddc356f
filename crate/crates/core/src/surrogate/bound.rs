use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `C1 * f_inf^2 / (K L) + C2 * (K^-2 + L^-4)` for a network of `L` layers of `K` neurons.
pub fn conjecture_bound(k: usize, l: usize, f_inf: f64, c1: f64, c2: f64) -> Result<f64> {
    if k == 0 || l == 0 {
        return Err(Error::arg(format!("network size must be positive, got K={k}, L={l}")));
    }
    let (k, l) = (k as f64, l as f64);
    Ok(c1 * f_inf * f_inf / (k * l) + c2 * (k.powi(-2) + l.powi(-4)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjectureConstants {
    pub c1: f64,
    pub c2: f64,
}

impl ConjectureConstants {
    pub fn bound(&self, k: usize, l: usize, f_inf: f64) -> Result<f64> {
        conjecture_bound(k, l, f_inf, self.c1, self.c2)
    }
}

/// Minimum-norm least-squares fit of `(C1, C2)` to observed errors.
///
/// Each observation is `(K, L, f_inf, mse)`. When every observation shares
/// the same `(K, L, f_inf)` the system has rank one and the minimum-norm
/// solution is returned.
pub fn fit_conjecture_constants(obs: &[(usize, usize, f64, f64)]) -> Result<ConjectureConstants> {
    if obs.is_empty() {
        return Err(Error::EmptyData("no observations to fit".into()));
    }
    let (mut g11, mut g12, mut g22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(k, l, f_inf, y) in obs {
        if k == 0 || l == 0 || !f_inf.is_finite() || !y.is_finite() {
            return Err(Error::arg(format!("bad observation ({k}, {l}, {f_inf}, {y})")));
        }
        let (kf, lf) = (k as f64, l as f64);
        let a = f_inf * f_inf / (kf * lf);
        let b = kf.powi(-2) + lf.powi(-4);
        g11 += a * a;
        g12 += a * b;
        g22 += b * b;
        r1 += a * y;
        r2 += b * y;
    }
    // pseudo-inverse of the symmetric 2x2 normal matrix via its eigenpairs
    let tr = g11 + g22;
    let disc = (((g11 - g22) / 2.0).powi(2) + g12 * g12).sqrt();
    let lams = [tr / 2.0 + disc, tr / 2.0 - disc];
    let tol = lams[0].abs() * 1e-12;
    let (mut c1, mut c2) = (0.0, 0.0);
    for lam in lams {
        if lam <= tol {
            continue;
        }
        let (vx, vy) = if g12.abs() > 0.0 {
            (g12, lam - g11)
        } else if (lam - g11).abs() <= (lam - g22).abs() {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        let n = (vx * vx + vy * vy).sqrt();
        let (vx, vy) = (vx / n, vy / n);
        let proj = (vx * r1 + vy * r2) / lam;
        c1 += proj * vx;
        c2 += proj * vy;
    }
    Ok(ConjectureConstants { c1, c2 })
}
