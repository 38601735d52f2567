//! Fully-connected tanh networks, output transforms that hard-encode
//! initial/boundary conditions, and the batched derivative engine used in
//! training.

mod activation;
mod jet;
mod params;
mod transform;

pub use activation::tanh as fast_tanh;
pub use jet::{JetSpec, JetWorkspace, CHUNK};
pub use params::{init_network, InputMap, NetworkParams};
pub use transform::{Jet, OutputTransform};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("layer sizes must have at least two positive entries, got {0:?}")]
    InvalidLayerSizes(Vec<usize>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input box must satisfy lo < hi in every channel")]
    InvalidInputBox,
    #[error("non-finite parameter")]
    NonFinite,
    #[error("snapshot: {0}")]
    Snapshot(String),
}
