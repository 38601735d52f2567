use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::autodiff::Real;

/// Values of a scalar field and its diagonal derivatives at one point.
/// Entries that were not requested are left at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub u: T,
    pub u_x: T,
    pub u_xx: T,
    pub u_t: T,
    pub u_tt: T,
}

impl<T: Real> Jet<T> {
    pub fn zero() -> Self {
        let z = T::from_f64(0.0);
        Self { u: z, u_x: z, u_xx: z, u_t: z, u_tt: z }
    }
}

/// Post-processing of the raw network output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputTransform {
    #[default]
    Identity,
    /// `û = t (x−1)(x+1) NN − sin(πx)`: the initial condition `−sin(πx)` and
    /// the boundary values `û(±1, t) = 0` hold for any network output.
    BurgersHard,
}

impl OutputTransform {
    pub fn apply<T: Real>(&self, raw: T, x: T, time: T) -> T {
        match self {
            OutputTransform::Identity => raw,
            OutputTransform::BurgersHard => {
                let one = T::from_f64(1.0);
                time * (x - one) * (x + one) * raw - x.scale(PI).sin()
            }
        }
    }

    /// Apply the transform to a raw jet at a fixed physical point, producing
    /// the jet of `û`.
    pub fn apply_jet<T: Real>(&self, raw: &Jet<T>, x: f64, t: f64) -> Jet<T> {
        match self {
            OutputTransform::Identity => *raw,
            OutputTransform::BurgersHard => {
                // û = q N + s, q = t(x²−1), s = −sin(πx)
                let q = t * (x * x - 1.0);
                let (q_x, q_xx, q_t) = (2.0 * x * t, 2.0 * t, x * x - 1.0);
                let (sp, cp) = (PI * x).sin_cos();
                let (s, s_x, s_xx) = (-sp, -PI * cp, PI * PI * sp);
                Jet {
                    u: raw.u.scale(q).add_const(s),
                    u_x: (raw.u.scale(q_x) + raw.u_x.scale(q)).add_const(s_x),
                    u_xx: (raw.u.scale(q_xx) + raw.u_x.scale(2.0 * q_x) + raw.u_xx.scale(q)).add_const(s_xx),
                    u_t: raw.u.scale(q_t) + raw.u_t.scale(q),
                    u_tt: raw.u_t.scale(2.0 * q_t) + raw.u_tt.scale(q),
                }
            }
        }
    }

    /// Transpose of the derivative part of [`OutputTransform::apply_jet`]:
    /// maps `∂L/∂(û jet)` to `∂L/∂(raw jet)` at a fixed physical point.
    pub fn jet_adjoint(&self, bar: &Jet<f64>, x: f64, t: f64) -> Jet<f64> {
        match self {
            OutputTransform::Identity => *bar,
            OutputTransform::BurgersHard => {
                let q = t * (x * x - 1.0);
                let (q_x, q_xx, q_t) = (2.0 * x * t, 2.0 * t, x * x - 1.0);
                Jet {
                    u: bar.u * q + bar.u_x * q_x + bar.u_xx * q_xx + bar.u_t * q_t,
                    u_x: bar.u_x * q + bar.u_xx * 2.0 * q_x,
                    u_xx: bar.u_xx * q,
                    u_t: bar.u_t * q + bar.u_tt * 2.0 * q_t,
                    u_tt: bar.u_tt * q,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{lift_input, Dual2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn burgers_hard_examples() {
        let tr = OutputTransform::BurgersHard;
        for raw in [-3.0, 0.0, 17.5] {
            assert_eq!(tr.apply(raw, 0.37, 0.0), -(0.37 * PI).sin());
            assert_eq!(tr.apply(raw, 1.0, 0.6), -(PI).sin());
            assert!(tr.apply(raw, 1.0, 0.6).abs() < 1e-15);
        }
        assert_eq!(tr.apply(2.0, 0.0, 1.0), -2.0);
        assert_eq!(OutputTransform::Identity.apply(2.5, 0.1, 0.2), 2.5);
    }

    #[test]
    fn hard_constraints_hold_for_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tr = OutputTransform::BurgersHard;
        for _ in 0..1000 {
            let raw: f64 = rng.gen_range(-50.0..50.0);
            let x: f64 = rng.gen_range(-1.0..1.0);
            let t: f64 = rng.gen_range(0.0..1.0);
            assert!((tr.apply(raw, x, 0.0) + (PI * x).sin()).abs() < 1e-15);
            assert!(tr.apply(raw, 1.0, t).abs() < 1e-15);
            assert!(tr.apply(raw, -1.0, t).abs() < 1e-15);
        }
    }

    /// `apply_jet` against differentiating `apply` with dual numbers, using a
    /// closed-form stand-in for the network output.
    #[test]
    fn jet_transform_matches_dual_differentiation() {
        let raw_fn = |x: Dual2, t: Dual2| (x.scale(1.3) + t.scale(-0.7)).tanh() * (x * t).sin().add_const(0.4);
        let tr = OutputTransform::BurgersHard;
        for &(x, t) in &[(0.3, 0.5), (-0.8, 0.1), (0.95, 0.9)] {
            let dx = |sx: f64, st: f64| {
                let (xd, td) = (lift_input(x, sx), lift_input(t, st));
                (raw_fn(xd, td), tr.apply(raw_fn(xd, td), xd, td))
            };
            let (rx, ux) = dx(1.0, 0.0);
            let (rt, ut) = dx(0.0, 1.0);
            let raw = Jet { u: rx.value, u_x: rx.d1, u_xx: rx.d2, u_t: rt.d1, u_tt: rt.d2 };
            let got = tr.apply_jet(&raw, x, t);
            for (a, b) in [(got.u, ux.value), (got.u_x, ux.d1), (got.u_xx, ux.d2), (got.u_t, ut.d1), (got.u_tt, ut.d2)] {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn adjoint_is_transpose_of_linear_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rand_jet = |rng: &mut ChaCha8Rng| Jet {
            u: rng.gen_range(-1.0..1.0),
            u_x: rng.gen_range(-1.0..1.0),
            u_xx: rng.gen_range(-1.0..1.0),
            u_t: rng.gen_range(-1.0..1.0),
            u_tt: rng.gen_range(-1.0..1.0),
        };
        let dot = |a: &Jet<f64>, b: &Jet<f64>| a.u * b.u + a.u_x * b.u_x + a.u_xx * b.u_xx + a.u_t * b.u_t + a.u_tt * b.u_tt;
        for tr in [OutputTransform::Identity, OutputTransform::BurgersHard] {
            for _ in 0..50 {
                let (x, t) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
                let a = rand_jet(&mut rng);
                let b = rand_jet(&mut rng);
                // linear part: apply_jet(a) − apply_jet(0)
                let ta = tr.apply_jet(&a, x, t);
                let t0 = tr.apply_jet(&Jet::<f64>::zero(), x, t);
                let lin = Jet {
                    u: ta.u - t0.u,
                    u_x: ta.u_x - t0.u_x,
                    u_xx: ta.u_xx - t0.u_xx,
                    u_t: ta.u_t - t0.u_t,
                    u_tt: ta.u_tt - t0.u_tt,
                };
                let lhs = dot(&lin, &b);
                let rhs = dot(&a, &tr.jet_adjoint(&b, x, t));
                assert!((lhs - rhs).abs() < 1e-12, "{lhs} {rhs}");
            }
        }
    }
}
