use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::network::{Jet, JetSpec, JetWorkspace, NetworkParams, CHUNK};
use crate::sampling::CollocationPoint;

use super::{residual_expr, PdeError, ProblemKind, ProblemSpec};

/// A point on the initial line, on the boundary, or in an evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub x: f64,
    pub t: f64,
    pub param: Option<f64>,
}

/// A supervised point with a known solution value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub x: f64,
    pub t: f64,
    pub param: Option<f64>,
    pub value: f64,
}

/// Everything the loss is evaluated on.
#[derive(Debug, Clone, Copy, Default)]
pub struct LossInputs<'a> {
    pub collocation: &'a [CollocationPoint],
    pub ic: &'a [BoundaryPoint],
    pub bc: &'a [BoundaryPoint],
    pub data: &'a [LabeledPoint],
}

/// Loss terms; `ic` and `bc` already include their weights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub pde: f64,
    pub ic: f64,
    pub bc: f64,
    pub data: f64,
    pub total: f64,
}

/// Batched loss and gradient evaluation through the jet engine. Holds one
/// workspace per loss term so buffers are never reshaped between terms.
#[derive(Debug, Default)]
pub struct LossEvaluator {
    ws: [JetWorkspace; 4],
    input: Option<Array2<f64>>,
}

struct Coord {
    x: f64,
    t: f64,
    param: f64,
}

impl LossEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Push `n` points through the network chunk by chunk. `visit` receives
    /// the point index and its raw jet and returns `∂L/∂(raw jet)`, which is
    /// back-propagated into `grads` when given. Padding rows of the final
    /// chunk repeat a real point and receive zero seeds.
    #[allow(clippy::too_many_arguments)]
    fn sweep(
        &mut self,
        slot: usize,
        params: &NetworkParams,
        spec: &ProblemSpec,
        n: usize,
        coord: impl Fn(usize) -> Coord,
        jet_spec: JetSpec,
        mut grads: Option<&mut NetworkParams>,
        mut visit: impl FnMut(usize, &Jet<f64>) -> Jet<f64>,
    ) -> Result<(), PdeError> {
        let dim = spec.input_dim();
        let input = self.input.get_or_insert_with(|| Array2::zeros((CHUNK, dim)));
        if input.ncols() != dim {
            *input = Array2::zeros((CHUNK, dim));
        }
        let mut seeds = vec![Jet::zero(); CHUNK];
        for start in (0..n).step_by(CHUNK) {
            let len = CHUNK.min(n - start);
            for r in 0..CHUNK {
                let c = coord(start + r.min(len - 1));
                input[[r, 0]] = c.x;
                input[[r, 1]] = c.t;
                if dim > 2 {
                    input[[r, 2]] = c.param;
                }
            }
            let jets = params.jet_forward(input.view(), jet_spec, &mut self.ws[slot])?;
            for (r, seed) in seeds.iter_mut().enumerate() {
                *seed = if r < len { visit(start + r, &jets[r]) } else { Jet::zero() };
            }
            if let Some(g) = grads.as_deref_mut() {
                params.jet_backward(&mut self.ws[slot], &seeds, g);
            }
        }
        Ok(())
    }

    /// PDE loss `Σ_e mean_{points of equation e} r²`, optionally adding its
    /// gradient into `grads`.
    fn pde_term(
        &mut self,
        params: &NetworkParams,
        spec: &ProblemSpec,
        points: &[CollocationPoint],
        grads: Option<&mut NetworkParams>,
    ) -> Result<f64, PdeError> {
        let mut counts = vec![0usize; spec.num_equations()];
        for p in points {
            if p.equation >= counts.len() {
                return Err(PdeError::Invalid(format!("equation index {} out of range", p.equation)));
            }
            counts[p.equation] += 1;
        }
        let kind = spec.kind;
        let mut loss = 0.0;
        let want_grad = grads.is_some();
        self.sweep(
            0,
            params,
            spec,
            points.len(),
            |i| coord_of(spec, points[i].x, points[i].t, points[i].param),
            JetSpec::new(2, if kind == ProblemKind::Wave { 2 } else { 1 }),
            grads,
            |i, raw| {
                let p = &points[i];
                let param = p.param.unwrap_or(spec.param);
                let jet = spec.transform.apply_jet(raw, p.x, p.t);
                let r = residual_expr(kind, &jet, param);
                let inv_n = 1.0 / counts[p.equation] as f64;
                loss += r * r * inv_n;
                if !want_grad {
                    return Jet::zero();
                }
                let g = 2.0 * r * inv_n;
                let bar = match kind {
                    ProblemKind::Burgers => Jet { u: g * jet.u_x, u_x: g * jet.u, u_xx: -g * param, u_t: g, u_tt: 0.0 },
                    ProblemKind::Wave => Jet { u: 0.0, u_x: 0.0, u_xx: -g * param, u_t: 0.0, u_tt: g },
                };
                spec.transform.jet_adjoint(&bar, p.x, p.t)
            },
        )?;
        Ok(loss)
    }

    fn ic_term(
        &mut self,
        params: &NetworkParams,
        spec: &ProblemSpec,
        points: &[BoundaryPoint],
        grads: Option<&mut NetworkParams>,
    ) -> Result<f64, PdeError> {
        if spec.w_ic == 0.0 {
            return Ok(0.0);
        }
        if points.is_empty() {
            return Err(PdeError::MissingPoints("initial-condition"));
        }
        let velocity = spec.constrains_initial_velocity();
        let scale = spec.w_ic / points.len() as f64;
        let mut loss = 0.0;
        self.sweep(
            1,
            params,
            spec,
            points.len(),
            |i| coord_of(spec, points[i].x, points[i].t, points[i].param),
            JetSpec::new(0, velocity as u8),
            grads,
            |i, raw| {
                let p = &points[i];
                let jet = spec.transform.apply_jet(raw, p.x, p.t);
                let e = jet.u - spec.initial_value(p.x);
                let v = if velocity { jet.u_t } else { 0.0 };
                loss += scale * (e * e + v * v);
                let bar = Jet { u: 2.0 * scale * e, u_t: 2.0 * scale * v, ..Jet::zero() };
                spec.transform.jet_adjoint(&bar, p.x, p.t)
            },
        )?;
        Ok(loss)
    }

    fn value_term(
        &mut self,
        slot: usize,
        params: &NetworkParams,
        spec: &ProblemSpec,
        points: &[LabeledPoint],
        weight: f64,
        grads: Option<&mut NetworkParams>,
    ) -> Result<f64, PdeError> {
        if points.is_empty() || weight == 0.0 {
            return Ok(0.0);
        }
        let scale = weight / points.len() as f64;
        let mut loss = 0.0;
        self.sweep(
            slot,
            params,
            spec,
            points.len(),
            |i| coord_of(spec, points[i].x, points[i].t, points[i].param),
            JetSpec::VALUE,
            grads,
            |i, raw| {
                let p = &points[i];
                let u = spec.transform.apply_jet(raw, p.x, p.t).u;
                let e = u - p.value;
                loss += scale * e * e;
                let bar = Jet { u: 2.0 * scale * e, ..Jet::zero() };
                spec.transform.jet_adjoint(&bar, p.x, p.t)
            },
        )?;
        Ok(loss)
    }

    fn evaluate(
        &mut self,
        params: &NetworkParams,
        spec: &ProblemSpec,
        inputs: &LossInputs,
        mut grads: Option<&mut NetworkParams>,
    ) -> Result<LossBreakdown, PdeError> {
        if let Some(g) = grads.as_deref_mut() {
            g.fill(0.0);
        }
        let pde = if inputs.collocation.is_empty() {
            0.0
        } else {
            self.pde_term(params, spec, inputs.collocation, grads.as_deref_mut())?
        };
        let ic = self.ic_term(params, spec, inputs.ic, grads.as_deref_mut())?;
        let bc = if spec.w_bc == 0.0 {
            0.0
        } else {
            if inputs.bc.is_empty() {
                return Err(PdeError::MissingPoints("boundary"));
            }
            let targets: Vec<LabeledPoint> =
                inputs.bc.iter().map(|p| LabeledPoint { x: p.x, t: p.t, param: p.param, value: 0.0 }).collect();
            self.value_term(2, params, spec, &targets, spec.w_bc, grads.as_deref_mut())?
        };
        let data = self.value_term(3, params, spec, inputs.data, 1.0, grads)?;
        Ok(LossBreakdown { pde, ic, bc, data, total: pde + ic + bc + data })
    }

    /// Loss terms without gradients.
    pub fn loss(&mut self, params: &NetworkParams, spec: &ProblemSpec, inputs: &LossInputs) -> Result<LossBreakdown, PdeError> {
        self.evaluate(params, spec, inputs, None)
    }

    /// Loss terms; `grads` is overwritten with `∂total/∂θ`.
    pub fn loss_and_grad(
        &mut self,
        params: &NetworkParams,
        spec: &ProblemSpec,
        inputs: &LossInputs,
        grads: &mut NetworkParams,
    ) -> Result<LossBreakdown, PdeError> {
        self.evaluate(params, spec, inputs, Some(grads))
    }

    /// PDE residual at every point, in order.
    pub fn residuals(
        &mut self,
        params: &NetworkParams,
        spec: &ProblemSpec,
        points: &[CollocationPoint],
    ) -> Result<Vec<f64>, PdeError> {
        let kind = spec.kind;
        let mut out = vec![0.0; points.len()];
        self.sweep(
            0,
            params,
            spec,
            points.len(),
            |i| coord_of(spec, points[i].x, points[i].t, points[i].param),
            JetSpec::new(2, if kind == ProblemKind::Wave { 2 } else { 1 }),
            None,
            |i, raw| {
                let p = &points[i];
                let jet = spec.transform.apply_jet(raw, p.x, p.t);
                out[i] = residual_expr(kind, &jet, p.param.unwrap_or(spec.param));
                Jet::zero()
            },
        )?;
        Ok(out)
    }

    /// Transformed network output `û` at every point.
    pub fn predict(
        &mut self,
        params: &NetworkParams,
        spec: &ProblemSpec,
        points: &[BoundaryPoint],
    ) -> Result<Vec<f64>, PdeError> {
        let mut out = vec![0.0; points.len()];
        self.sweep(
            3,
            params,
            spec,
            points.len(),
            |i| coord_of(spec, points[i].x, points[i].t, points[i].param),
            JetSpec::VALUE,
            None,
            |i, raw| {
                out[i] = spec.transform.apply_jet(raw, points[i].x, points[i].t).u;
                Jet::zero()
            },
        )?;
        Ok(out)
    }
}

fn coord_of(spec: &ProblemSpec, x: f64, t: f64, param: Option<f64>) -> Coord {
    Coord { x, t, param: param.unwrap_or(spec.param) }
}

/// Mean squared residual over `points` (per equation subset, summed).
pub fn pde_loss(params: &NetworkParams, spec: &ProblemSpec, points: &[CollocationPoint]) -> Result<f64, PdeError> {
    if points.is_empty() {
        return Err(PdeError::EmptySet);
    }
    LossEvaluator::new().pde_term(params, spec, points, None)
}

/// `(L_ic, L_bc)`, each already multiplied by its weight. For the wave
/// problem the IC term includes `u_t(x, 0)²`.
pub fn ic_bc_loss(
    params: &NetworkParams,
    spec: &ProblemSpec,
    ic: &[BoundaryPoint],
    bc: &[BoundaryPoint],
) -> Result<(f64, f64), PdeError> {
    let l = LossEvaluator::new().loss(params, spec, &LossInputs { ic, bc, ..Default::default() })?;
    Ok((l.ic, l.bc))
}

/// Mean squared error on supervised points; 0 for an empty set.
pub fn data_loss(params: &NetworkParams, spec: &ProblemSpec, labeled: &[LabeledPoint]) -> Result<f64, PdeError> {
    LossEvaluator::new().value_term(3, params, spec, labeled, 1.0, None)
}

/// Residuals at `points`.
pub fn residuals(params: &NetworkParams, spec: &ProblemSpec, points: &[CollocationPoint]) -> Result<Vec<f64>, PdeError> {
    LossEvaluator::new().residuals(params, spec, points)
}

/// Predictions `û` at `points`.
pub fn predict(params: &NetworkParams, spec: &ProblemSpec, points: &[BoundaryPoint]) -> Result<Vec<f64>, PdeError> {
    LossEvaluator::new().predict(params, spec, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{Real, Tape};
    use crate::network::init_network;
    use crate::pde::{burgers_residual, point_jet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn net_for(spec: &ProblemSpec, hidden: &[usize], seed: u64) -> NetworkParams {
        let mut sizes = vec![spec.input_dim()];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        init_network(&sizes, seed).unwrap().with_input_map(spec.input_map()).unwrap()
    }

    fn grid_points(spec: &ProblemSpec, n: usize) -> Vec<CollocationPoint> {
        let d = spec.domain;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let x = d.x_min + d.width() * (i as f64 + 0.5) / n as f64;
                let t = d.t_min + d.duration() * (j as f64 + 0.5) / n as f64;
                out.push(CollocationPoint::new(x, t));
            }
        }
        out
    }

    #[test]
    fn zero_network_pde_loss_matches_closed_form_sum() {
        let spec = ProblemSpec::burgers(0.01);
        let net = NetworkParams::zeros(&[2, 50, 50, 50, 50, 1]).unwrap().with_input_map(spec.input_map()).unwrap();
        let pts = grid_points(&spec, 32);
        let got = pde_loss(&net, &spec, &pts).unwrap();
        let want: f64 = pts
            .iter()
            .map(|p| {
                let (s, c) = (PI * p.x).sin_cos();
                let r = PI * s * c - 0.01 * PI * PI * s;
                r * r
            })
            .sum::<f64>()
            / pts.len() as f64;
        assert!((got - want).abs() < 1e-13 * want.max(1.0), "{got} {want}");
        assert!(matches!(pde_loss(&net, &spec, &[]), Err(PdeError::EmptySet)));
        let one = [CollocationPoint::new(0.5, 0.5)];
        let r = burgers_residual(&net, &spec, 0.5, 0.5, 0.01).unwrap();
        assert!((pde_loss(&net, &spec, &one).unwrap() - r * r).abs() < 1e-15);
    }

    #[test]
    fn batched_residuals_match_scalar_path() {
        for spec in [ProblemSpec::burgers(0.004), ProblemSpec::wave(1.7), ProblemSpec::burgers(0.01).parameterized(0.0025, 0.0124)] {
            let net = net_for(&spec, &[20, 20, 20], 3);
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let d = spec.domain;
            let pts: Vec<CollocationPoint> = (0..300)
                .map(|_| CollocationPoint {
                    x: rng.gen_range(d.x_min..d.x_max),
                    t: rng.gen_range(d.t_min..d.t_max),
                    param: spec.param_range.map(|(a, b)| rng.gen_range(a..b)),
                    equation: 0,
                })
                .collect();
            let batched = residuals(&net, &spec, &pts).unwrap();
            let flat = net.to_flat();
            for (p, &r) in pts.iter().zip(&batched) {
                let param = p.param.unwrap_or(spec.param);
                let jet = point_jet(&net, &flat, &spec, p.x, p.t, param).unwrap();
                let want = residual_expr(spec.kind, &jet, param);
                assert!((r - want).abs() < 1e-11 * want.abs().max(1.0), "{r} {want}");
            }
        }
    }

    #[test]
    fn pde_loss_is_permutation_invariant() {
        let spec = ProblemSpec::burgers(0.01);
        let net = net_for(&spec, &[16, 16], 8);
        let mut pts = grid_points(&spec, 12);
        let a = pde_loss(&net, &spec, &pts).unwrap();
        pts.reverse();
        pts.swap(3, 77);
        let b = pde_loss(&net, &spec, &pts).unwrap();
        assert!((a - b).abs() < 1e-14 * a);
    }

    #[test]
    fn ic_bc_terms() {
        let b = ProblemSpec::burgers(0.01);
        let net = net_for(&b, &[10, 10], 1);
        assert_eq!(ic_bc_loss(&net, &b, &[], &[]).unwrap(), (0.0, 0.0));

        let w = ProblemSpec::wave(2.0);
        let zero = NetworkParams::zeros(&[2, 10, 1]).unwrap().with_input_map(w.input_map()).unwrap();
        let ic = w.ic_points(&[]);
        let bc = w.bc_points(&[]);
        let (l_ic, l_bc) = ic_bc_loss(&zero, &w, &ic, &bc).unwrap();
        let want: f64 = ic.iter().map(|p| w.initial_value(p.x).powi(2)).sum::<f64>() / ic.len() as f64;
        assert!((l_ic - want).abs() < 1e-15);
        assert_eq!(l_bc, 0.0);
        let single = [BoundaryPoint { x: 0.0, t: 0.0, param: None }];
        let (l0, _) = ic_bc_loss(&zero, &w, &single, &bc).unwrap();
        assert!((l0 - (1.0 - 1.0 / 16f64.cosh()).powi(2)).abs() < 1e-15);

        let mut w0 = w.clone();
        w0.w_ic = 0.0;
        let (l, _) = ic_bc_loss(&net_for(&w0, &[8], 2), &w0, &ic, &bc).unwrap();
        assert_eq!(l, 0.0);
        assert!(matches!(ic_bc_loss(&zero, &w, &[], &bc), Err(PdeError::MissingPoints(_))));
    }

    #[test]
    fn data_term() {
        let spec = ProblemSpec::wave(1.0);
        let net = net_for(&spec, &[12, 12], 5);
        assert_eq!(data_loss(&net, &spec, &[]).unwrap(), 0.0);
        let pts: Vec<BoundaryPoint> = (0..40).map(|i| BoundaryPoint { x: -3.0 + 0.15 * i as f64, t: 0.1 * i as f64, param: None }).collect();
        let pred = predict(&net, &spec, &pts).unwrap();
        let labeled: Vec<LabeledPoint> =
            pts.iter().zip(&pred).map(|(p, &v)| LabeledPoint { x: p.x, t: p.t, param: None, value: v }).collect();
        assert_eq!(data_loss(&net, &spec, &labeled).unwrap(), 0.0);
        let one = [LabeledPoint { value: pred[0] + 0.3, ..labeled[0] }];
        assert!((data_loss(&net, &spec, &one).unwrap() - 0.09).abs() < 1e-15);
    }

    /// Gradient of the full batched loss against a tape recording of the
    /// same loss through the scalar `Dual2<Var>` path.
    #[test]
    fn batched_gradient_matches_tape() {
        let mut wave = ProblemSpec::wave(2.0);
        wave.n_ic = 7;
        wave.n_bc = 5;
        for spec in [ProblemSpec::burgers(0.01), wave, ProblemSpec::burgers(0.01).parameterized(0.0025, 0.0124)] {
            let net = net_for(&spec, &[9, 9], 21);
            let mut rng = ChaCha8Rng::seed_from_u64(22);
            let d = spec.domain;
            let pts: Vec<CollocationPoint> = (0..150)
                .map(|_| CollocationPoint {
                    x: rng.gen_range(d.x_min..d.x_max),
                    t: rng.gen_range(d.t_min..d.t_max),
                    param: spec.param_range.map(|(a, b)| rng.gen_range(a..b)),
                    equation: 0,
                })
                .collect();
            let ic = spec.ic_points(&[]);
            let bc = spec.bc_points(&[]);
            let data = [LabeledPoint { x: d.x_min + 0.3, t: d.t_max * 0.4, param: None, value: 0.2 }];
            let inputs = LossInputs { collocation: &pts, ic: &ic, bc: &bc, data: &data };
            let mut grads = net.zeros_like();
            let loss = LossEvaluator::new().loss_and_grad(&net, &spec, &inputs, &mut grads).unwrap();

            let tape = Tape::new();
            let flat: Vec<_> = net.to_flat().iter().map(|&w| tape.param(w)).collect();
            let mut total = crate::autodiff::Var::from_f64(0.0);
            let n = pts.len() as f64;
            for p in &pts {
                let param = p.param.unwrap_or(spec.param);
                let jet = point_jet(&net, &flat, &spec, p.x, p.t, param).unwrap();
                total = total + residual_expr(spec.kind, &jet, param).square().scale(1.0 / n);
            }
            if spec.w_ic > 0.0 {
                for p in &ic {
                    let jet = point_jet(&net, &flat, &spec, p.x, p.t, spec.param).unwrap();
                    let e = jet.u.add_const(-spec.initial_value(p.x)).square() + jet.u_t.square();
                    total = total + e.scale(spec.w_ic / ic.len() as f64);
                }
                for p in &bc {
                    let jet = point_jet(&net, &flat, &spec, p.x, p.t, spec.param).unwrap();
                    total = total + jet.u.square().scale(spec.w_bc / bc.len() as f64);
                }
            }
            let jet = point_jet(&net, &flat, &spec, data[0].x, data[0].t, spec.param).unwrap();
            total = total + jet.u.add_const(-0.2).square();
            assert!((total.value() - loss.total).abs() < 1e-11 * loss.total.max(1.0));
            let g = tape.grad(total).unwrap();
            let batched = grads.to_flat();
            let scale = batched.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (i, (a, b)) in batched.iter().zip(g.iter()).enumerate() {
                assert!((a - b).abs() < 1e-10 * scale, "param {i}: {a} vs {b}");
            }
        }
    }
}
