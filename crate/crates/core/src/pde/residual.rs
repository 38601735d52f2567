use crate::autodiff::{Dual2, Real};
use crate::network::{Jet, NetworkError, NetworkParams};

use super::{PdeError, ProblemKind, ProblemSpec};

/// Jet of the transformed output `û` at one point, computed with two
/// forward-over-forward passes (along x, then along t). `flat` supplies the
/// parameters in canonical order, so `T = Var` records them on a tape.
pub fn point_jet<T: Real>(
    params: &NetworkParams,
    flat: &[T],
    spec: &ProblemSpec,
    x: f64,
    t: f64,
    param: f64,
) -> Result<Jet<T>, NetworkError> {
    let lifted: Vec<Dual2<T>> = flat.iter().map(|&w| Dual2::constant(w)).collect();
    let pass = |dir: usize| -> Result<Dual2<T>, NetworkError> {
        let mut input = vec![
            Dual2::new(T::from_f64(x), T::from_f64(if dir == 0 { 1.0 } else { 0.0 }), T::from_f64(0.0)),
            Dual2::new(T::from_f64(t), T::from_f64(if dir == 1 { 1.0 } else { 0.0 }), T::from_f64(0.0)),
        ];
        if spec.is_parameterized() {
            input.push(Dual2::constant(T::from_f64(param)));
        }
        params.forward_with(&lifted, &input)
    };
    let dx = pass(0)?;
    let dt = pass(1)?;
    let raw = Jet { u: dx.value, u_x: dx.d1, u_xx: dx.d2, u_t: dt.d1, u_tt: dt.d2 };
    Ok(spec.transform.apply_jet(&raw, x, t))
}

/// The residual of the problem's PDE from the jet of `û`.
pub fn residual_expr<T: Real>(kind: ProblemKind, jet: &Jet<T>, param: f64) -> T {
    match kind {
        ProblemKind::Burgers => jet.u_t + jet.u * jet.u_x - jet.u_xx.scale(param),
        ProblemKind::Wave => jet.u_tt - jet.u_xx.scale(param),
    }
}

fn checked_residual(
    params: &NetworkParams,
    spec: &ProblemSpec,
    kind: ProblemKind,
    x: f64,
    t: f64,
    param: f64,
) -> Result<f64, PdeError> {
    if !spec.domain.contains(x, t) {
        return Err(PdeError::OutOfDomain { x, t });
    }
    if !(param > 0.0) {
        return Err(PdeError::Invalid(format!("parameter {param} must be positive")));
    }
    let jet = point_jet(params, &params.to_flat(), spec, x, t, param)?;
    Ok(residual_expr(kind, &jet, param))
}

/// `û_t + û û_x − ν û_xx` at one point.
pub fn burgers_residual(params: &NetworkParams, spec: &ProblemSpec, x: f64, t: f64, nu: f64) -> Result<f64, PdeError> {
    checked_residual(params, spec, ProblemKind::Burgers, x, t, nu)
}

/// `û_tt − c² û_xx` at one point.
pub fn wave_residual(params: &NetworkParams, spec: &ProblemSpec, x: f64, t: f64, c2: f64) -> Result<f64, PdeError> {
    checked_residual(params, spec, ProblemKind::Wave, x, t, c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::init_network;
    use std::f64::consts::PI;

    fn zero_net(spec: &ProblemSpec) -> NetworkParams {
        NetworkParams::zeros(&[spec.input_dim(), 20, 20, 1]).unwrap().with_input_map(spec.input_map()).unwrap()
    }

    #[test]
    fn zero_network_burgers_residual_is_analytic() {
        let spec = ProblemSpec::burgers(0.01);
        let net = zero_net(&spec);
        let r = burgers_residual(&net, &spec, 0.5, 0.3, 0.01).unwrap();
        assert!((r - (-0.01 * PI * PI)).abs() < 1e-14, "{r}");
        assert!((r + 0.0987).abs() < 1e-4);
        assert!(burgers_residual(&net, &spec, 0.0, 0.7, 0.01).unwrap().abs() < 1e-15);
        for x in [-0.9, -0.3, 0.2, 0.77] {
            let want = PI * (PI * x).sin() * (PI * x).cos() - 0.01 * PI * PI * (PI * x).sin();
            assert!((burgers_residual(&net, &spec, x, 0.4, 0.01).unwrap() - want).abs() < 1e-13);
        }
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let spec = ProblemSpec::burgers(0.01);
        let net = zero_net(&spec);
        assert!(matches!(burgers_residual(&net, &spec, 1.5, 0.3, 0.01), Err(PdeError::OutOfDomain { .. })));
        assert!(burgers_residual(&net, &spec, 0.5, 0.3, 0.0).is_err());
    }

    #[test]
    fn zero_network_wave_residual_vanishes() {
        let spec = ProblemSpec::wave(2.0);
        assert_eq!(wave_residual(&zero_net(&spec), &spec, 1.0, 2.0, 2.0).unwrap(), 0.0);
    }

    /// Stencil reconstruction of the same expression from plain forward
    /// evaluations of the transformed output.
    #[test]
    fn residuals_match_finite_difference_reconstruction() {
        for (spec, param) in [(ProblemSpec::burgers(0.01), 0.01), (ProblemSpec::wave(2.0), 2.0)] {
            let net = init_network(&[2, 30, 30, 30, 1], 17).unwrap().with_input_map(spec.input_map()).unwrap();
            let u = |x: f64, t: f64| spec.transform.apply(net.forward(&[x, t]).unwrap(), x, t);
            let h = 1e-3 * spec.domain.width();
            let d1 = |f: &dyn Fn(f64) -> f64, s: f64| (f(s - 2.0 * h) - 8.0 * f(s - h) + 8.0 * f(s + h) - f(s + 2.0 * h)) / (12.0 * h);
            let d2 = |f: &dyn Fn(f64) -> f64, s: f64| {
                (-f(s + 2.0 * h) + 16.0 * f(s + h) - 30.0 * f(s) + 16.0 * f(s - h) - f(s - 2.0 * h)) / (12.0 * h * h)
            };
            let d = spec.domain;
            for &(fx, ft) in &[(0.3, 0.5), (0.7, 0.2), (0.45, 0.85)] {
                let (x, t) = (d.x_min + fx * d.width(), d.t_min + ft * d.duration());
                let fd = Jet {
                    u: u(x, t),
                    u_x: d1(&|s| u(s, t), x),
                    u_xx: d2(&|s| u(s, t), x),
                    u_t: d1(&|s| u(x, s), t),
                    u_tt: d2(&|s| u(x, s), t),
                };
                let want = residual_expr(spec.kind, &fd, param);
                let got = match spec.kind {
                    ProblemKind::Burgers => burgers_residual(&net, &spec, x, t, param).unwrap(),
                    ProblemKind::Wave => wave_residual(&net, &spec, x, t, param).unwrap(),
                };
                assert!((got - want).abs() <= 1e-4 * want.abs().max(1e-2), "{got} vs {want}");
            }
        }
    }

    /// Travelling sech profile `f(x + ct)` fed through the residual
    /// expression: the wave residual vanishes and is linear in the field.
    #[test]
    fn wave_expression_on_closed_form_probes() {
        let c2: f64 = 2.5;
        let c = c2.sqrt();
        let probe = |s: f64, sign: f64| {
            let (f, fp) = (1.0 / s.cosh(), -s.tanh() / s.cosh());
            let fpp = (1.0 / s.cosh()) * (2.0 * s.tanh().powi(2) - 1.0);
            Jet { u: f, u_x: fp, u_xx: fpp, u_t: sign * c * fp, u_tt: c2 * fpp }
        };
        let add = |a: Jet<f64>, b: Jet<f64>| Jet {
            u: a.u + b.u,
            u_x: a.u_x + b.u_x,
            u_xx: a.u_xx + b.u_xx,
            u_t: a.u_t + b.u_t,
            u_tt: a.u_tt + b.u_tt,
        };
        for (x, t) in [(0.1, 0.2), (-1.3, 0.7)] {
            let a = probe(x + c * t, 1.0);
            let b = probe(x - c * t, -1.0);
            assert!(residual_expr(ProblemKind::Wave, &a, c2).abs() < 1e-14);
            let mut skew = b;
            skew.u_tt *= 0.5;
            let lhs = residual_expr(ProblemKind::Wave, &add(a, skew), c2);
            let rhs = residual_expr(ProblemKind::Wave, &a, c2) + residual_expr(ProblemKind::Wave, &skew, c2);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }
}
