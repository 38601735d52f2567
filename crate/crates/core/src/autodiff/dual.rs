use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{AutodiffError, Real};

/// Second-order forward-mode number along a single direction ξ.
///
/// `d1 = ∂f/∂ξ`, `d2 = ∂²f/∂ξ²`. Components are themselves [`Real`], so a
/// `Dual2<Var>` can be recorded on a reverse tape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2<T = f64> {
    pub value: T,
    pub d1: T,
    pub d2: T,
}

impl<T: Real> Dual2<T> {
    pub fn new(value: T, d1: T, d2: T) -> Self {
        Self { value, d1, d2 }
    }

    pub fn constant(value: T) -> Self {
        let zero = T::from_f64(0.0);
        Self { value, d1: zero, d2: zero }
    }

    /// Compose with a scalar function `f` given `f(g)`, `f'(g)`, `f''(g)`.
    #[inline]
    fn chain(self, f: T, df: T, ddf: T) -> Self {
        Self {
            value: f,
            d1: df * self.d1,
            d2: ddf * self.d1 * self.d1 + df * self.d2,
        }
    }
}

/// Seed an input coordinate. `seed_d1 = 1` marks the differentiation
/// direction, `0` a coordinate held fixed.
pub fn lift_input(x: f64, seed_d1: f64) -> Dual2<f64> {
    Dual2 { value: x, d1: seed_d1, d2: 0.0 }
}

/// Value, first and second derivative of `f` along input coordinate
/// `direction_index` at `point`.
pub fn directional_derivs<F>(
    f: F,
    point: &[f64],
    direction_index: usize,
) -> Result<(f64, f64, f64), AutodiffError>
where
    F: Fn(&[Dual2<f64>]) -> Dual2<f64>,
{
    if direction_index >= point.len() {
        return Err(AutodiffError::DirectionOutOfRange {
            index: direction_index,
            dim: point.len(),
        });
    }
    let lifted: Vec<Dual2<f64>> = point
        .iter()
        .enumerate()
        .map(|(i, &x)| lift_input(x, if i == direction_index { 1.0 } else { 0.0 }))
        .collect();
    let out = f(&lifted);
    Ok((out.value, out.d1, out.d2))
}

impl<T: Real> Add for Dual2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl<T: Real> Sub for Dual2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl<T: Real> Mul for Dual2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let two = T::from_f64(2.0);
        Self::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + two * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}

impl<T: Real> Div for Dual2<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        // 1/g: f' = -1/g², f'' = 2/g³
        let inv = T::from_f64(1.0) / o.value;
        let inv2 = inv * inv;
        let recip = o.chain(inv, -inv2, T::from_f64(2.0) * inv2 * inv);
        self * recip
    }
}

impl<T: Real> Neg for Dual2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.value, -self.d1, -self.d2)
    }
}

impl<T: Real> Real for Dual2<T> {
    fn from_f64(v: f64) -> Self {
        Self::constant(T::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.value.value()
    }

    fn tanh(self) -> Self {
        let f = self.value.tanh();
        let df = T::from_f64(1.0) - f * f;
        let ddf = T::from_f64(-2.0) * f * df;
        self.chain(f, df, ddf)
    }

    fn sin(self) -> Self {
        let s = self.value.sin();
        self.chain(s, self.value.cos(), -s)
    }

    fn cos(self) -> Self {
        let c = self.value.cos();
        self.chain(c, -self.value.sin(), -c)
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    fn cosh(self) -> Self {
        let c = self.value.cosh();
        self.chain(c, self.value.sinh(), c)
    }

    fn sinh(self) -> Self {
        let s = self.value.sinh();
        self.chain(s, self.value.cosh(), s)
    }

    fn scale(self, c: f64) -> Self {
        Self::new(self.value.scale(c), self.d1.scale(c), self.d2.scale(c))
    }

    fn add_const(self, c: f64) -> Self {
        Self::new(self.value.add_const(c), self.d1, self.d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn lift_and_square() {
        assert_eq!(lift_input(3.0, 1.0), Dual2::new(3.0, 1.0, 0.0));
        let c = lift_input(3.0, 0.0);
        assert_eq!(c * c, Dual2::new(9.0, 0.0, 0.0));
        let x = lift_input(3.0, 1.0);
        assert_eq!(x * x, Dual2::new(9.0, 6.0, 2.0));
    }

    #[test]
    fn constants_have_no_derivatives() {
        let c: Dual2 = Real::from_f64(4.5);
        assert_eq!((c.d1, c.d2), (0.0, 0.0));
    }

    #[test]
    fn directional_examples() {
        let (v, d1, d2) = directional_derivs(|p| p[0].sin(), &[0.0], 0).unwrap();
        assert_eq!((v, d1, d2), (0.0, 1.0, 0.0));
        let (v, d1, d2) = directional_derivs(|p| p[0] * p[1], &[2.0, 3.0], 1).unwrap();
        assert_eq!((v, d1, d2), (6.0, 2.0, 0.0));
        assert_eq!(
            directional_derivs(|p| p[0], &[1.0, 2.0], 2),
            Err(AutodiffError::DirectionOutOfRange { index: 2, dim: 2 })
        );
    }

    /// Each elementary op against hand-derived first and second derivatives,
    /// applied to an inner function g(x) = 0.7x + 0.3x² so the chain rule is
    /// exercised, not just the identity seed.
    #[test]
    fn elementary_ops_match_analytic_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = 1e-12;
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-2.0..2.0);
            let y: f64 = rng.gen_range(0.5..2.0);
            let xd = lift_input(x, 1.0);
            let g = xd.scale(0.7) + xd * xd * Dual2::from_f64(0.3);
            let (g0, g1, g2) = (0.7 * x + 0.3 * x * x, 0.7 + 0.6 * x, 0.6);
            let chain = |f: f64, df: f64, ddf: f64| (f, df * g1, ddf * g1 * g1 + df * g2);

            let cases: Vec<(Dual2, (f64, f64, f64))> = vec![
                (g.tanh(), {
                    let t = g0.tanh();
                    let s = 1.0 - t * t;
                    chain(t, s, -2.0 * t * s)
                }),
                (g.sin(), chain(g0.sin(), g0.cos(), -g0.sin())),
                (g.cos(), chain(g0.cos(), -g0.sin(), -g0.cos())),
                (g.exp(), chain(g0.exp(), g0.exp(), g0.exp())),
                (g.cosh(), chain(g0.cosh(), g0.sinh(), g0.cosh())),
                (g.sinh(), chain(g0.sinh(), g0.cosh(), g0.sinh())),
                // y / g
                (Dual2::from_f64(y) / g, chain(y / g0, -y / (g0 * g0), 2.0 * y / (g0 * g0 * g0))),
                // g + g*g
                (g + g * g, (g0 + g0 * g0, g1 + 2.0 * g0 * g1, g2 + 2.0 * (g1 * g1 + g0 * g2))),
                // g - x
                (g - xd, (g0 - x, g1 - 1.0, g2)),
            ];
            if g0.abs() < 1e-3 {
                continue;
            }
            for (got, (v, d1, d2)) in cases {
                assert!(rel_close(got.value, v, tol), "value {got:?} vs {v}");
                assert!(rel_close(got.d1, d1, tol), "d1 {got:?} vs {d1}");
                assert!(rel_close(got.d2, d2, tol), "d2 {got:?} vs {d2}");
            }
        }
    }
}
