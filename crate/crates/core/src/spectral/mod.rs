//! Periodic pseudospectral substrate.

mod field;
mod grid;
mod identities;
mod ops;

pub use field::RealField;
pub use identities::{hilbert_residuals, random_bandlimited, HilbertResiduals};
pub use grid::{SpectralGrid, MAX_MODES, MIN_MODES};
pub use ops::{
    antiderivative_periodic, apply_multiplier, commutator_h, derivative, derivative_l2,
    frac_derivative, hilbert, homogeneous_norm, inner, mean, product, resample, sobolev_inner, sobolev_norm,
    sobolev_norm_sq, SobolevIndex,
};
