//! Pseudospectral laboratory for the needle-crystal interface equation.

// `!(x > 0.0)` is used so that NaN is rejected as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crystal;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod linear;
pub mod runner;
pub mod spectral;
pub mod trajectory;

pub use crystal::{Background, BackgroundKind, PhysicsParams};
pub use diagnostics::{Check, StudyReport};
pub use error::{Error, Result};
pub use evolution::{EvolveConfig, Scheme};
pub use runner::{parse_config, RunConfig};
pub use spectral::{RealField, SobolevIndex, SpectralGrid};
pub use trajectory::{Abort, Trajectory};
