//! Physics-informed neural networks trained with adaptive collocation
//! sampling.
//!
//! The crate is built from the ground up: a small autodiff core
//! ([`autodiff`]), tanh networks with hard-constraint output transforms
//! ([`network`]), PDE residuals for Burgers and the 1D wave equation
//! ([`pde`]), collocation strategies including fixed-budget online adaptive
//! learning, RAD, RAR-D and RAR ([`sampling`]), an Adam training loop with
//! staged learning rates and periodic resampling ([`training`]), reference
//! solutions ([`oracle`]), error metrics ([`metrics`]) and a config-driven
//! experiment runner ([`experiment`]).

// `!(x > 0.0)` is used on purpose throughout: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autodiff;
pub mod experiment;
pub mod metrics;
pub mod network;
pub mod oracle;
pub mod pde;
pub mod sampling;
pub mod training;
