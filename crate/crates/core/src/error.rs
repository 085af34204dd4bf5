use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids (n={left_n}, L={left_len}) vs (n={right_n}, L={right_len})")]
    GridMismatch {
        left_n: usize,
        left_len: f64,
        right_n: usize,
        right_len: f64,
    },

    #[error("field contains a non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `max |h^I + u|` exceeded the exponentiation guard.
    #[error("overflow guard: max|h + u| = {value:.3e} exceeds {limit}")]
    Overflow { value: f64, limit: f64 },

    #[error("loss of ellipticity at t = {t}: min B[u] = {beta_eff:.3e}")]
    EllipticityLoss { t: f64, beta_eff: f64 },

    #[error("stability guard violated: dt * max|b - mean(b)| * lambda_max^3 = {value:.3e} > {limit}")]
    StabilityGuard { value: f64, limit: f64 },

    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("Picard iteration did not converge in {iterations} iterations (last distance {last:.3e})")]
    PicardNonConvergence { iterations: usize, last: f64, trace: Vec<f64> },

    /// A member run of a study ended early.
    #[error("run aborted at t = {t}: {reason}")]
    RunAborted { t: f64, reason: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    Study(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Numerical aborts (as opposed to bad input).
    pub fn is_numerical_abort(&self) -> bool {
        matches!(
            self,
            Error::Overflow { .. }
                | Error::EllipticityLoss { .. }
                | Error::StabilityGuard { .. }
                | Error::BlowUp { .. }
                | Error::PicardNonConvergence { .. }
                | Error::RunAborted { .. }
                | Error::NonFinite { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
