//! Time integration of the quasilinear interface equation.

mod config;
mod march;

pub use config::{
    EvolveConfig, Scheme, DEFAULT_MAX_SLAB_STEPS, DEFAULT_PICARD_MAX_ITER, DEFAULT_PICARD_TOL,
    DEFAULT_SLAB_STEPS,
};
pub use march::{
    evolve, picard_iterate, step_imex, step_picard_slab, uniform_bound_check, viscosity_sweep,
    PicardSlab, UniformBound, ViscositySweep,
};
