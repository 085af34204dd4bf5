//! Needle backgrounds, the operator tower and interface geometry.

mod background;
mod interface;
mod params;
mod tower;

pub use background::{Background, BackgroundKind, DEFAULT_INNER_FRACTION, WINDOW_OUTER_FRACTION};
pub use interface::{curvature, reconstruct_interface, Curve};
pub use params::PhysicsParams;
pub use tower::{
    big_b, evaluate, identity_residuals, q1, q2, q3, q4, q5, q_decomposed, q_direct, rhs, rhs_n,
    IdentityResiduals, Tower, OVERFLOW_LIMIT,
};
