//! Exact derivatives of a network output, two ways.
//!
//! Evaluates u, u_x, u_xx of the hard-constrained Burgers network at a point
//! with forward-mode `Dual2` numbers, then records the squared residual on a
//! reverse tape and back-propagates it to every weight. Compares both
//! against finite differences.
//!
//!     cargo run --release --example autodiff_derivatives

use fboal::autodiff::{Real, Tape, Var};
use fboal::network::init_network;
use fboal::pde::{point_jet, residual_expr, ProblemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nu = 0.01;
    let spec = ProblemSpec::burgers(nu);
    let net = init_network(&[2, 20, 20, 1], 7)?.with_input_map(spec.input_map())?;
    let flat = net.to_flat();
    let (x, t) = (0.3, 0.6);

    let jet = point_jet(&net, &flat, &spec, x, t, nu)?;
    println!("u = {:.8}  u_x = {:.8}  u_xx = {:.8}  u_t = {:.8}", jet.u, jet.u_x, jet.u_xx, jet.u_t);

    let h = 1e-3;
    let u = |x: f64| point_jet(&net, &flat, &spec, x, t, nu).map(|j| j.u);
    let fd_xx = (u(x + h)? - 2.0 * u(x)? + u(x - h)?) / (h * h);
    println!("finite-difference u_xx = {fd_xx:.8}  (|diff| {:.1e})", (fd_xx - jet.u_xx).abs());

    // reverse mode: d(r²)/dθ for the residual r = u_t + u u_x − ν u_xx
    let tape = Tape::new();
    let vars: Vec<Var> = flat.iter().map(|&w| tape.param(w)).collect();
    let jet_v = point_jet(&net, &vars, &spec, x, t, nu)?;
    let loss = residual_expr(spec.kind, &jet_v, nu).square();
    let grad = tape.grad(loss)?;
    println!("r² = {:.6e}, {} parameters, {} tape nodes", loss.value(), grad.len(), tape.len());

    let r2 = |w: &[f64]| -> Result<f64, Box<dyn std::error::Error>> {
        let j = point_jet(&net, w, &spec, x, t, nu)?;
        Ok(residual_expr(spec.kind, &j, nu).powi(2))
    };
    let eps = 1e-6;
    for j in [0, flat.len() / 2, flat.len() - 1] {
        let (mut up, mut down) = (flat.clone(), flat.clone());
        up[j] += eps;
        down[j] -= eps;
        let fd = (r2(&up)? - r2(&down)?) / (2.0 * eps);
        println!("  θ[{j:>3}]  tape {:+.8e}  central difference {fd:+.8e}", grad[j]);
    }
    Ok(())
}
