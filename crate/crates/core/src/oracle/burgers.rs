use std::f64::consts::PI;

use super::{GaussHermite, OracleError};

/// Default quadrature order for [`burgers_reference`].
pub const DEFAULT_QUAD_ORDER: usize = 128;
/// Largest order tried before giving up.
pub const MAX_QUAD_ORDER: usize = 8192;
/// Tolerated change between orders n and 2n, relative to max(|u|, 1).
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Cole–Hopf quadrature at a fixed order. With φ(y, 0) = exp(−cos(πy)/(2πν))
/// and the heat kernel written through η = √(4νt)·z,
///
/// u(x,t) = −∫ sin(π(x−η)) φ(x−η) e^{−z²} dz / ∫ φ(x−η) e^{−z²} dz.
///
/// The exponent is shifted by its maximum before exponentiation, so small ν
/// (φ spanning hundreds of orders of magnitude) is harmless.
pub fn burgers_quadrature(x: f64, t: f64, nu: f64, rule: &GaussHermite) -> f64 {
    let spread = (4.0 * nu * t).sqrt();
    let inv = 1.0 / (2.0 * PI * nu);
    let mut max_a = f64::NEG_INFINITY;
    let mut expo = Vec::with_capacity(rule.order());
    for (&z, &lw) in rule.nodes.iter().zip(&rule.log_weights) {
        let y = x - spread * z;
        let a = lw - (PI * y).cos() * inv;
        max_a = max_a.max(a);
        expo.push((a, y));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (a, y) in expo {
        let w = (a - max_a).exp();
        num += (PI * y).sin() * w;
        den += w;
    }
    -num / den
}

/// Reference solution of `u_t + u u_x = ν u_xx` on [−1,1]×[0,1] with
/// `u(x,0) = −sin(πx)` and homogeneous Dirichlet boundaries.
///
/// Starts at `quad_order` and doubles until two consecutive orders agree to
/// [`CONVERGENCE_TOL`].
pub fn burgers_reference(x: f64, t: f64, nu: f64, quad_order: usize) -> Result<f64, OracleError> {
    if !(nu > 0.0) || !(t >= 0.0) || !x.is_finite() || !t.is_finite() {
        return Err(OracleError::InvalidArgument(format!("x={x}, t={t}, nu={nu}")));
    }
    if quad_order < 32 {
        return Err(OracleError::InvalidArgument(format!("quadrature order {quad_order} < 32")));
    }
    if t == 0.0 {
        return Ok(-(PI * x).sin());
    }
    let mut n = quad_order;
    let mut coarse = burgers_quadrature(x, t, nu, &GaussHermite::cached(n));
    let mut change = f64::INFINITY;
    while 2 * n <= MAX_QUAD_ORDER {
        let fine = burgers_quadrature(x, t, nu, &GaussHermite::cached(2 * n));
        change = (fine - coarse).abs() / fine.abs().max(1.0);
        if change <= CONVERGENCE_TOL {
            return Ok(fine);
        }
        coarse = fine;
        n *= 2;
    }
    Err(OracleError::NotConverged { x, t, nu, order: n, change })
}
