//! Problem definitions, residual operators and loss terms.
//!
//! Two problems are covered: viscous Burgers on [−1,1]×[0,1] with the
//! hard-constraint output transform, and the 1D wave equation on
//! [−l,l]×[0,T] with soft initial/boundary losses. Either can be
//! parameterized, in which case the PDE parameter (ν or c²) becomes a third
//! network input.
//!
//! Two evaluation paths exist. The scalar path ([`burgers_residual`],
//! [`wave_residual`], [`point_jet`]) runs one point at a time through
//! `Dual2` numbers and is generic over [`Real`](crate::autodiff::Real), so it
//! can also be recorded on a tape. The batched path ([`LossEvaluator`],
//! [`residuals`]) drives the jet engine and is what training uses.

mod loss;
mod residual;

pub use loss::{
    data_loss, ic_bc_loss, pde_loss, predict, residuals, BoundaryPoint, LabeledPoint, LossBreakdown, LossEvaluator,
    LossInputs,
};
pub use residual::{burgers_residual, point_jet, residual_expr, wave_residual};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{InputMap, NetworkError, OutputTransform};
use crate::oracle::{self, OracleError};

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("empty point set")]
    EmptySet,
    #[error("point (x={x}, t={t}) lies outside the domain box")]
    OutOfDomain { x: f64, t: f64 },
    #[error("{0} points required when its weight is nonzero")]
    MissingPoints(&'static str),
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// `u_t + u u_x − ν u_xx = 0`, `u(x,0) = −sin(πx)`, `u(±1,t) = 0`.
    Burgers,
    /// `u_tt − c² u_xx = 0` with a sech-pulse initial condition.
    Wave,
}

/// Space-time box `[x_min, x_max] × [t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Domain {
    pub fn new(x_min: f64, x_max: f64, t_min: f64, t_max: f64) -> Self {
        Self { x_min, x_max, t_min, t_max }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn duration(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        x >= self.x_min && x <= self.x_max && t >= self.t_min && t <= self.t_max
    }
}

/// A concrete problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub domain: Domain,
    /// PDE parameter used by points that do not carry their own (ν or c²).
    pub param: f64,
    /// Training interval of the parameter when it is a network input.
    pub param_range: Option<(f64, f64)>,
    pub transform: OutputTransform,
    pub w_ic: f64,
    pub w_bc: f64,
    /// Equidistant initial-condition points (in x).
    pub n_ic: usize,
    /// Equidistant boundary points per side (in t).
    pub n_bc: usize,
}

impl ProblemSpec {
    /// Burgers with fixed viscosity and the hard-constraint transform, so
    /// only the residual loss remains.
    pub fn burgers(nu: f64) -> Self {
        Self {
            kind: ProblemKind::Burgers,
            domain: Domain::new(-1.0, 1.0, 0.0, 1.0),
            param: nu,
            param_range: None,
            transform: OutputTransform::BurgersHard,
            w_ic: 0.0,
            w_bc: 0.0,
            n_ic: 0,
            n_bc: 0,
        }
    }

    /// Wave equation with fixed `c²`, identity transform and soft IC/BC
    /// losses (512 points each by default).
    pub fn wave(c2: f64) -> Self {
        let l = oracle::WAVE_HALF_LENGTH;
        Self {
            kind: ProblemKind::Wave,
            domain: Domain::new(-l, l, 0.0, oracle::WAVE_FINAL_TIME),
            param: c2,
            param_range: None,
            transform: OutputTransform::Identity,
            w_ic: 1.0,
            w_bc: 1.0,
            n_ic: 512,
            n_bc: 512,
        }
    }

    /// Make the PDE parameter a network input over `[lo, hi]`.
    pub fn parameterized(mut self, lo: f64, hi: f64) -> Self {
        self.param_range = Some((lo, hi));
        self.param = 0.5 * (lo + hi);
        self
    }

    pub fn validate(&self) -> Result<(), PdeError> {
        let d = &self.domain;
        if !(d.x_max > d.x_min && d.t_max > d.t_min) {
            return Err(PdeError::Invalid("empty domain box".into()));
        }
        if let Some((lo, hi)) = self.param_range {
            if !(lo < hi) || !(lo > 0.0) {
                return Err(PdeError::Invalid(format!("parameter range [{lo}, {hi}]")));
            }
        } else if !(self.param > 0.0) {
            return Err(PdeError::Invalid(format!("parameter {} must be positive", self.param)));
        }
        if self.w_ic < 0.0 || self.w_bc < 0.0 {
            return Err(PdeError::Invalid("negative loss weight".into()));
        }
        if self.w_ic > 0.0 && self.n_ic == 0 {
            return Err(PdeError::MissingPoints("initial-condition"));
        }
        if self.w_bc > 0.0 && self.n_bc == 0 {
            return Err(PdeError::MissingPoints("boundary"));
        }
        Ok(())
    }

    pub fn is_parameterized(&self) -> bool {
        self.param_range.is_some()
    }

    pub fn input_dim(&self) -> usize {
        if self.is_parameterized() {
            3
        } else {
            2
        }
    }

    /// Affine map of (x, t[, parameter]) onto [−1, 1] per channel.
    pub fn input_map(&self) -> InputMap {
        let d = &self.domain;
        let mut lo = vec![d.x_min, d.t_min];
        let mut hi = vec![d.x_max, d.t_max];
        if let Some((a, b)) = self.param_range {
            lo.push(a);
            hi.push(b);
        }
        InputMap::from_box(&lo, &hi).expect("validated box")
    }

    pub fn num_equations(&self) -> usize {
        1
    }

    /// Half-length `l` of the wave box.
    pub fn half_length(&self) -> f64 {
        0.5 * self.domain.width()
    }

    /// Initial displacement `u(x, 0)`.
    pub fn initial_value(&self, x: f64) -> f64 {
        match self.kind {
            ProblemKind::Burgers => -(PI * x).sin(),
            ProblemKind::Wave => oracle::wave_initial(x, self.half_length()),
        }
    }

    /// Whether the IC loss also penalizes `u_t(x, 0)`.
    pub fn constrains_initial_velocity(&self) -> bool {
        self.kind == ProblemKind::Wave
    }

    /// Reference solution at a point.
    pub fn reference(&self, x: f64, t: f64, param: f64) -> Result<f64, OracleError> {
        match self.kind {
            ProblemKind::Burgers => oracle::burgers_reference(x, t, param, oracle::DEFAULT_QUAD_ORDER),
            ProblemKind::Wave => Ok(oracle::wave_exact(x, t, param, self.half_length())),
        }
    }

    /// Initial-condition points: `n_ic` equidistant x on the closed
    /// interval at `t = t_min`. In parameterized mode the training values
    /// are assigned round-robin.
    pub fn ic_points(&self, param_values: &[f64]) -> Vec<BoundaryPoint> {
        let d = &self.domain;
        (0..self.n_ic)
            .map(|i| BoundaryPoint {
                x: linspace_node(d.x_min, d.x_max, self.n_ic, i),
                t: d.t_min,
                param: round_robin(param_values, i),
            })
            .collect()
    }

    /// Boundary points: `n_bc` equidistant times on each of the two sides.
    pub fn bc_points(&self, param_values: &[f64]) -> Vec<BoundaryPoint> {
        let d = &self.domain;
        let mut out = Vec::with_capacity(2 * self.n_bc);
        for x in [d.x_min, d.x_max] {
            for i in 0..self.n_bc {
                out.push(BoundaryPoint {
                    x,
                    t: linspace_node(d.t_min, d.t_max, self.n_bc, i),
                    param: round_robin(param_values, out.len()),
                });
            }
        }
        out
    }
}

fn round_robin(values: &[f64], i: usize) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values[i % values.len()])
    }
}

/// `i`-th of `n` equidistant nodes on the closed interval (midpoint if n=1).
pub(crate) fn linspace_node(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n <= 1 {
        0.5 * (lo + hi)
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boxes() {
        let b = ProblemSpec::burgers(0.01);
        assert_eq!(b.domain, Domain::new(-1.0, 1.0, 0.0, 1.0));
        let w = ProblemSpec::wave(2.0);
        assert_eq!(w.domain, Domain::new(-4.0, 4.0, 0.0, 5.5));
        assert_eq!(w.half_length(), 4.0);
        assert!(b.validate().is_ok() && w.validate().is_ok());
        assert!(ProblemSpec::burgers(0.01).parameterized(0.02, 0.01).validate().is_err());
        let mut bad = ProblemSpec::wave(1.0);
        bad.n_ic = 0;
        assert!(matches!(bad.validate(), Err(PdeError::MissingPoints(_))));
    }

    #[test]
    fn input_map_covers_parameter_channel() {
        let p = ProblemSpec::burgers(0.01).parameterized(0.0025, 0.0124);
        assert_eq!(p.input_dim(), 3);
        let m = p.input_map();
        assert!((m.apply(2, 0.0025) + 1.0).abs() < 1e-12);
        assert!((m.apply(2, 0.0124) - 1.0).abs() < 1e-12);
        assert!((m.apply(1, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn wave_ic_and_bc_points() {
        let w = ProblemSpec::wave(1.0);
        let ic = w.ic_points(&[]);
        assert_eq!(ic.len(), 512);
        assert_eq!((ic[0].x, ic[511].x), (-4.0, 4.0));
        assert!(ic.iter().all(|p| p.t == 0.0 && p.param.is_none()));
        let bc = w.bc_points(&[1.0, 2.0]);
        assert_eq!(bc.len(), 1024);
        assert!(bc[..512].iter().all(|p| p.x == -4.0) && bc[512..].iter().all(|p| p.x == 4.0));
        assert_eq!((bc[0].param, bc[1].param, bc[2].param), (Some(1.0), Some(2.0), Some(1.0)));
        assert!((w.initial_value(0.0) - (1.0 - 1.0 / 16f64.cosh())).abs() < 1e-15);
    }
}
