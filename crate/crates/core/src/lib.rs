//! Bias-free networks with `|z|^p` activations, trained to output 1 on the
//! unit sphere, and the polytopes cut out by their level sets `f(x) = 1`.
//!
//! - [`net`]: the network family, exact forward pass and hand-derived gradients.
//! - [`train`]: sphere sampling, ADAM and best-of-k restarts.
//! - [`levelset`]: radial extraction of the level set in 2D, 3D and 3D slices.
//! - [`analysis`]: vertex/face recovery, regularity, polar duals, identification.
//! - [`export`]: SVG, OBJ, CSV and JSON emitters and the model format.

pub mod analysis;
pub mod error;
pub mod export;
pub mod levelset;
pub mod net;
pub mod train;

pub use error::{AnalysisError, ExportError, LevelSetError, NetError, TrainError};
pub use net::{Matrix, Network, NetworkSpec};
pub use train::{train, train_best_of, TrainConfig, TrainResult};
