//! Config grammar, study pipelines and the verification suite.

mod config;
mod pipelines;
mod verify;

pub use config::{emit_config, parse_config, InitSpec, RunConfig, CONFIG_KEYS};
pub use pipelines::{run_study, Outcome, PipelineRun, Study, DEFAULT_DELTAS, DEFAULT_EPSILONS};
pub use verify::{verify_suite, VerifyOptions};
