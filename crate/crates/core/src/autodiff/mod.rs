//! Exact derivatives for residual losses.
//!
//! Two composable mechanisms live here:
//!
//! * [`Dual2`]: forward-mode numbers carrying a value plus first and second
//!   derivatives along one input direction. Nesting a network evaluation in
//!   `Dual2` yields `u`, `u_ξ` and `u_ξξ` in a single pass.
//! * [`Tape`] / [`Var`]: a reverse-mode scalar tape. Parameters are recorded
//!   as leaves and [`Tape::grad`] returns `∂loss/∂θ` for every leaf.
//!
//! Both are generic over the [`Real`] trait, so `Dual2<Var>` records a whole
//! second-order residual expression on the tape and back-propagates it to the
//! network parameters.

mod dual;
mod real;
mod tape;

pub use dual::{directional_derivs, lift_input, Dual2};
pub use real::Real;
pub use tape::{Gradient, OpCode, Tape, TapeNode, Var};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("tape node {node} references parent {parent} that is not recorded before it")]
    Cycle { node: usize, parent: usize },
    #[error("loss variable does not belong to this tape")]
    ForeignVariable,
    #[error("direction index {index} out of range for {dim}-dimensional input")]
    DirectionOutOfRange { index: usize, dim: usize },
}
