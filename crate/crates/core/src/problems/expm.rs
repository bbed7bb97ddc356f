//! Closed-form exponential of a real 2x2 matrix.

pub type Mat2 = [[f64; 2]; 2];

pub fn mat_vec(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// `exp(t A)` from the trace and determinant of `A`.
///
/// With `mu = tr/2` and `disc = mu^2 - det`, `exp(tA) = e^{mu t} [c(t) I + s(t) (A - mu I)]`
/// where `(c, s)` is `(cos nt, sin nt / n)`, `(cosh nt, sinh nt / n)` or `(1, t)` for
/// negative, positive or zero `disc`, `n = sqrt|disc|`.
pub fn expm2(a: &Mat2, t: f64) -> Mat2 {
    let mu = 0.5 * (a[0][0] + a[1][1]);
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = mu * mu - det;
    let (c, s) = if disc < 0.0 {
        let nu = (-disc).sqrt();
        ((nu * t).cos(), (nu * t).sin() / nu)
    } else if disc > 0.0 {
        let nu = disc.sqrt();
        ((nu * t).cosh(), (nu * t).sinh() / nu)
    } else {
        (1.0, t)
    };
    let e = (mu * t).exp();
    [
        [e * (c + s * (a[0][0] - mu)), e * s * a[0][1]],
        [e * s * a[1][0], e * (c + s * (a[1][1] - mu))],
    ]
}
