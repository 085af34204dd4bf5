//! Smoothing functional, convergence studies, reports and file output.

mod output;
mod report;
mod series;
mod studies;

pub use output::{emit_outputs, to_json, RunArtifacts, FIELD_HEADER, NORMS_FILE, RUN_FILE};
pub use report::{Check, Environment, Measurement, StudyReport, Threshold};
pub use series::{smoothing_integral, NormSeries, Smoothing, MIN_SMOOTHING_SAMPLES};
pub use studies::{
    contraction_study, lipschitz_constants, lipschitz_study, refined, smoothing_study, viscosity_study,
    CONTRACTION_LIMIT, LIPSCHITZ_WINDOW, SMOOTHING_DRIFT_LIMIT, VISCOSITY_WINDOW,
};
