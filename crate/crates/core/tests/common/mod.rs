//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Independent finite-difference reference for viscous Burgers on
/// [−1, 1] × [0, 1] with u(x, 0) = −sin(πx) and homogeneous Dirichlet ends.
///
/// Crank–Nicolson in time on the conservative form
/// `u_t + (u²/2)_x = ν u_xx` with central differences; each step solves the
/// tridiagonal nonlinear system by Newton. Returns `u` on the
/// `(nx_out × nt_out)` equidistant grid (x-major), which must align with the
/// FD mesh: `n_intervals` is a multiple of `nx_out − 1` and every output
/// interval is covered by `steps_per_output` steps.
pub fn crank_nicolson_burgers(nu: f64, n_intervals: usize, steps_per_output: usize, nx_out: usize, nt_out: usize) -> Vec<f64> {
    assert_eq!(n_intervals % (nx_out - 1), 0, "output nodes must lie on the mesh");
    let stride = n_intervals / (nx_out - 1);
    let n = n_intervals + 1;
    let dx = 2.0 / n_intervals as f64;
    let dt = 1.0 / ((nt_out - 1) * steps_per_output) as f64;
    let mut u: Vec<f64> = (0..n).map(|i| -(PI * (-1.0 + i as f64 * dx)).sin()).collect();
    u[0] = 0.0;
    u[n - 1] = 0.0;

    let mut frames = vec![u.clone()];
    let (a_adv, a_diff) = (0.25 / dx, 0.5 * nu / (dx * dx));
    // explicit half of the CN operator, then the implicit residual
    let rhs_explicit = |u: &[f64], out: &mut [f64]| {
        for i in 1..n - 1 {
            let adv = a_adv * (u[i + 1] * u[i + 1] - u[i - 1] * u[i - 1]) * 0.5;
            let diff = a_diff * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
            out[i] = u[i] / dt - adv + diff;
        }
    };
    let mut b = vec![0.0; n];
    let mut next = u.clone();
    let (mut lo, mut di, mut up, mut r) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 1..nt_out {
        for _ in 0..steps_per_output {
            rhs_explicit(&u, &mut b);
            next.copy_from_slice(&u);
            for _newton in 0..20 {
                let mut worst: f64 = 0.0;
                for i in 1..n - 1 {
                    let v = &next;
                    let adv = a_adv * (v[i + 1] * v[i + 1] - v[i - 1] * v[i - 1]) * 0.5;
                    let diff = a_diff * (v[i + 1] - 2.0 * v[i] + v[i - 1]);
                    r[i] = v[i] / dt + adv - diff - b[i];
                    di[i] = 1.0 / dt + 2.0 * a_diff;
                    lo[i] = -a_adv * v[i - 1] - a_diff;
                    up[i] = a_adv * v[i + 1] - a_diff;
                    worst = worst.max(r[i].abs());
                }
                if worst < 1e-12 / dt {
                    break;
                }
                let delta = thomas(&lo[1..n - 1], &di[1..n - 1], &up[1..n - 1], &r[1..n - 1]);
                for (i, d) in delta.iter().enumerate() {
                    next[i + 1] -= d;
                }
            }
            std::mem::swap(&mut u, &mut next);
        }
        frames.push(u.clone());
    }
    let mut out = Vec::with_capacity(nx_out * nt_out);
    for ix in 0..nx_out {
        for frame in &frames {
            out.push(frame[ix * stride]);
        }
    }
    out
}

/// Tridiagonal solve (sub-diagonal `a`, diagonal `b`, super-diagonal `c`).
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let (mut cp, mut dp) = (vec![0.0; n], vec![0.0; n]);
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}
