use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{emit_config, RunConfig};
use crate::crystal::Background;
use crate::diagnostics::{
    contraction_study, lipschitz_study, smoothing_integral, smoothing_study, viscosity_study, Environment,
    StudyReport, MIN_SMOOTHING_SAMPLES,
};
use crate::error::{Error, Result};
use crate::evolution::{evolve, uniform_bound_check, Scheme};
use crate::spectral::{random_bandlimited, RealField, SpectralGrid};
use crate::trajectory::Trajectory;

pub const DEFAULT_EPSILONS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
pub const DEFAULT_DELTAS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Highest mode of the seeded Lipschitz perturbation.
const PERTURBATION_KMAX: usize = 8;

/// How a pipeline ended, mapped one-to-one onto exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    NumericalAbort,
    ThresholdFailure,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::NumericalAbort => 2,
            Self::ThresholdFailure => 3,
        }
    }

    fn of(report: &StudyReport) -> Self {
        if report.passed() {
            Self::Success
        } else {
            Self::ThresholdFailure
        }
    }
}

#[derive(Clone, Debug)]
pub enum Study {
    Simulate,
    Smoothing,
    ViscosityLimit { epsilons: Vec<f64> },
    Lipschitz { deltas: Vec<f64> },
    /// `slab_dt` forces the slab length instead of adapting it.
    Contraction { slab_dt: Option<f64> },
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Smoothing => "smoothing",
            Self::ViscosityLimit { .. } => "viscosity-limit",
            Self::Lipschitz { .. } => "lipschitz",
            Self::Contraction { .. } => "contraction",
        }
    }
}

pub struct PipelineRun {
    pub config_text: String,
    pub report: StudyReport,
    pub trajectory: Option<Trajectory>,
    pub background: Background,
    pub outcome: Outcome,
}

struct Prepared {
    grid: Arc<SpectralGrid>,
    u0: RealField,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let grid = cfg.grid()?;
    let u0 = cfg.initial_data(&grid)?;
    Ok(Prepared { grid, u0 })
}

/// Run `study` under `cfg`. Numerical aborts inside studies surface as
/// errors; an aborted `simulate` run still returns its partial trajectory.
pub fn run_study(cfg: &RunConfig, study: &Study) -> Result<PipelineRun> {
    let Prepared { grid, u0 } = prepare(cfg)?;
    let mut ec = cfg.evolve_config(&grid)?;
    let background = ec.bg.clone();
    let config_text = emit_config(cfg);
    let env = Environment::from_config(&ec, Some(cfg.seed));
    let with_env = |mut r: StudyReport| {
        let mut e = env.clone();
        e.scheme = r.environment.as_ref().map_or(e.scheme, |x| x.scheme.clone());
        r.environment = Some(e);
        r
    };

    let (report, trajectory) = match study {
        Study::Simulate => {
            let traj = evolve(&u0, &ec)?;
            let mut r = StudyReport::new("simulate", &config_text, None);
            r.measure("final_time", traj.final_time());
            r.measure("samples", traj.len() as f64);
            if let (Some(l2), Some(hs)) = (traj.l2.last(), traj.hs_half.last()) {
                r.measure("final_l2", *l2);
                r.measure("final_hs_half", *hs);
            }
            r.measure("min_b", traj.b_min.iter().copied().fold(f64::INFINITY, f64::min));
            r.measure("max_ledger_residual", traj.ledger_res.iter().copied().fold(0.0, f64::max));
            if traj.completed() && traj.len() >= MIN_SMOOTHING_SAMPLES {
                let sm = smoothing_integral(&traj)?;
                r.measure("smoothing_value", sm.value);
                r.measure("smoothing_ratio", sm.ratio);
                let ub = uniform_bound_check(&traj);
                r.measure("uniform_bound_lhs", ub.lhs);
                r.measure("uniform_bound_8m0_sq", ub.bound);
            }
            (r, Some(traj))
        }
        Study::Smoothing => (smoothing_study(&u0, &ec)?, None),
        Study::ViscosityLimit { epsilons } => (viscosity_study(&u0, &ec, epsilons)?, None),
        Study::Lipschitz { deltas } => {
            let kmax = PERTURBATION_KMAX.min(grid.n() / 2 - 1);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
            let p = random_bandlimited(&grid, kmax, 1.0, &mut rng)?;
            (lipschitz_study(&u0, &p, deltas, &ec)?, None)
        }
        Study::Contraction { slab_dt } => {
            ec.scheme = Scheme::Picard;
            let forced = match slab_dt {
                None => None,
                Some(t) if t.is_finite() && *t > 0.0 => Some(((t / ec.dt).round() as usize).max(1)),
                Some(t) => return Err(Error::InvalidParameter(format!("slab_dt = {t} must be positive"))),
            };
            (contraction_study(&u0, &ec, forced)?, None)
        }
    };
    let report = with_env(report);
    let outcome = match &trajectory {
        Some(t) if !t.completed() => Outcome::NumericalAbort,
        _ => Outcome::of(&report),
    };
    Ok(PipelineRun {
        config_text,
        report,
        trajectory,
        background,
        outcome,
    })
}
