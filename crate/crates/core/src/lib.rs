//! Connections, fundamental tensors and curvature on almost contact
//! manifolds with Norden metric, computed componentwise over a fixed frame
//! and checked either exactly (rational backend) or to a tolerance
//! (floating-point chart backend).

pub mod backend;
pub mod connections;
pub mod curvature;
pub mod error;
pub mod forms;
pub mod fundamental;
pub mod residual;
pub mod scalar;
pub mod structure;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::{Backend, Rational, Scalar};
pub use structure::AcnStructure;
pub use tensor::{FrameEndo, FrameTensor};
