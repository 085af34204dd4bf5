use serde::{Deserialize, Serialize};

use crate::crystal::{Background, PhysicsParams};
use crate::error::{Error, Result};
use crate::spectral::SobolevIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Frozen-coefficient step per time step.
    Imex,
    /// Fixed-point iteration of frozen-coefficient solves over a slab.
    Picard,
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "imex" => Ok(Self::Imex),
            "picard" => Ok(Self::Picard),
            other => Err(format!("unknown scheme '{other}' (expected imex or picard)")),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Imex => "imex",
            Self::Picard => "picard",
        })
    }
}

pub const DEFAULT_PICARD_TOL: f64 = 1e-10;
pub const DEFAULT_PICARD_MAX_ITER: usize = 50;
pub const DEFAULT_SLAB_STEPS: usize = 8;
pub const DEFAULT_MAX_SLAB_STEPS: usize = 256;

#[derive(Clone, Debug)]
pub struct EvolveConfig {
    pub params: PhysicsParams,
    pub bg: Background,
    pub s: SobolevIndex,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Absolute tolerance on successive iterates in `H^{s-1/2}`.
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Initial slab length in steps.
    pub slab_steps: usize,
    pub max_slab_steps: usize,
    /// Halve/double the slab length with the iteration count.
    pub adapt_slab: bool,
    pub output_stride: usize,
}

impl EvolveConfig {
    pub fn new(params: PhysicsParams, bg: Background, s: SobolevIndex, dt: f64, t_final: f64) -> Self {
        Self {
            params,
            bg,
            s,
            dt,
            t_final,
            scheme: Scheme::Imex,
            picard_tol: DEFAULT_PICARD_TOL,
            picard_max_iter: DEFAULT_PICARD_MAX_ITER,
            slab_steps: DEFAULT_SLAB_STEPS,
            max_slab_steps: DEFAULT_MAX_SLAB_STEPS,
            adapt_slab: true,
            output_stride: 1,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_output_stride(mut self, stride: usize) -> Self {
        self.output_stride = stride;
        self
    }

    pub fn with_slab_steps(mut self, steps: usize) -> Self {
        self.slab_steps = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.dt) {
            return bad(format!("t_final = {} must be at least dt = {}", self.t_final, self.dt));
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            return bad(format!("picard_tol = {} must be positive", self.picard_tol));
        }
        if self.picard_max_iter == 0 {
            return bad("picard_max_iter must be at least 1".into());
        }
        if self.slab_steps == 0 || self.max_slab_steps < self.slab_steps {
            return bad(format!(
                "slab length {} must lie in [1, {}]",
                self.slab_steps, self.max_slab_steps
            ));
        }
        if self.output_stride == 0 {
            return bad("output_stride must be at least 1".into());
        }
        Ok(())
    }
}
