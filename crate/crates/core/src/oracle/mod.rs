//! Reference solutions and evaluation meshes.
//!
//! Burgers is solved through the Cole–Hopf transform: the heat-equation
//! convolution is a Gaussian integral evaluated by Gauss–Hermite quadrature
//! with order doubling until consecutive orders agree. The wave problem has a
//! closed form made of travelling sech pulses.

mod burgers;
mod grid;
mod hermite;
mod wave;

pub use burgers::{burgers_quadrature, burgers_reference, CONVERGENCE_TOL, DEFAULT_QUAD_ORDER, MAX_QUAD_ORDER};
pub use grid::{make_grid, reference_field, write_field_csv, EvalGrid, GridKind};
pub use hermite::GaussHermite;
pub use wave::{wave_exact, wave_initial, WAVE_FINAL_TIME, WAVE_HALF_LENGTH};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not converge at x={x}, t={t}, nu={nu}: change {change:.3e} at order {order}")]
    NotConverged { x: f64, t: f64, nu: f64, order: usize, change: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
