use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64`, [`super::Dual2`] and [`super::Var`].
///
/// Anything written against `Real` can be evaluated plainly, differentiated
/// forward along an input direction, or recorded for reverse mode.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Lift a constant. Its derivatives are zero in every mode.
    fn from_f64(v: f64) -> Self;

    /// The primal value, discarding derivative information.
    fn value(&self) -> f64;

    fn tanh(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn cosh(self) -> Self;
    fn sinh(self) -> Self;

    fn square(self) -> Self {
        self * self
    }

    fn scale(self, c: f64) -> Self {
        self * Self::from_f64(c)
    }

    fn add_const(self, c: f64) -> Self {
        self + Self::from_f64(c)
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
}
