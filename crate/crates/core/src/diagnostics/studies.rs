use rayon::prelude::*;

use super::report::{Check, Environment, StudyReport};
use super::series::smoothing_integral;
use crate::crystal::Background;
use crate::error::{Error, Result};
use crate::evolution::{evolve, picard_iterate, uniform_bound_check, viscosity_sweep, EvolveConfig, Scheme};
use crate::linear::step_count;
use crate::spectral::{resample, sobolev_norm, sobolev_norm_sq, RealField, SpectralGrid};
use crate::trajectory::Trajectory;

/// Contraction threshold on successive Picard distances.
pub const CONTRACTION_LIMIT: f64 = 0.5;
/// Allowed relative drift of the smoothing ratio under refinement.
pub const SMOOTHING_DRIFT_LIMIT: f64 = 0.05;
pub const LIPSCHITZ_WINDOW: (f64, f64) = (0.8, 1.25);
pub const VISCOSITY_WINDOW: (f64, f64) = (1.7, 2.3);
/// Iterations spent measuring ratios on slabs that need not converge.
const MEASURE_ITERATIONS: usize = 8;

fn finished(traj: Trajectory) -> Result<Trajectory> {
    match &traj.abort {
        None => Ok(traj),
        Some(a) => Err(Error::RunAborted {
            t: a.t,
            reason: a.reason.clone(),
        }),
    }
}

fn describe(cfg: &EvolveConfig, extra: &str) -> String {
    let g = cfg.bg.grid();
    format!(
        "n={} L={:?} tau={:?} gamma={:?} eps={:?} s={:?} dt={:?} T={:?} scheme={} bg={} alpha={:?} tol={:?} {extra}",
        g.n(),
        g.length(),
        cfg.params.tau(),
        cfg.params.gamma(),
        cfg.params.epsilon(),
        cfg.s.value(),
        cfg.dt,
        cfg.t_final,
        cfg.scheme,
        cfg.bg.kind(),
        cfg.bg.inner_fraction(),
        cfg.picard_tol,
    )
}

fn field_digest(u: &RealField) -> String {
    u.samples().iter().map(|x| format!("{:x}", x.to_bits())).collect::<Vec<_>>().join(",")
}

/// Largest successive-distance ratio on one slab of `steps` steps, and
/// whether the slab converged. Numerical aborts count as divergence.
fn slab_ratio(u0: &RealField, cfg: &EvolveConfig, steps: usize, max_iter: usize, floor: f64) -> Result<(f64, bool, usize)> {
    match picard_iterate(u0, cfg, steps, cfg.dt, 0.0, max_iter) {
        Ok(slab) => {
            let r = slab.ratios(floor).into_iter().fold(0.0, f64::max);
            Ok((r, slab.converged, slab.iterations()))
        }
        Err(e) if e.is_numerical_abort() => Ok((f64::INFINITY, false, max_iter)),
        Err(e) => Err(e),
    }
}

/// Successive Picard distance ratios over the first slab. The slab length
/// starts at `cfg.slab_steps` and is halved until the slab converges with
/// ratio at most 1/2. With `forced_slab` the check is made on that length
/// instead; otherwise a slab four times the adapted one is measured too.
pub fn contraction_study(u0: &RealField, cfg: &EvolveConfig, forced_slab: Option<usize>) -> Result<StudyReport> {
    cfg.validate()?;
    if cfg.scheme != Scheme::Picard {
        return Err(Error::InvalidParameter("contraction study needs the picard scheme".into()));
    }
    let (n_steps, _) = step_count(cfg.t_final, cfg.dt);
    let floor = 1e3 * f64::EPSILON * sobolev_norm(u0, cfg.s.shifted(-0.5));
    let extra = format!("forced={forced_slab:?} u0={}", field_digest(u0));
    let mut report = StudyReport::new("contraction", &describe(cfg, &extra), Some(Environment::from_config(cfg, None)));

    let mut slab = cfg.slab_steps.min(n_steps).max(1);
    let (ratio, iterations) = loop {
        let (r, converged, it) = slab_ratio(u0, cfg, slab, cfg.picard_max_iter, floor)?;
        if converged && r <= CONTRACTION_LIMIT {
            break (r, it);
        }
        if slab == 1 {
            if !converged {
                return Err(Error::PicardNonConvergence {
                    iterations: it,
                    last: f64::NAN,
                    trace: Vec::new(),
                });
            }
            break (r, it);
        }
        slab /= 2;
    };
    report.measure("adapted_slab_steps", slab as f64);
    report.measure("adapted_slab_time", slab as f64 * cfg.dt);
    report.measure("adapted_iterations", iterations as f64);
    report.measure("adapted_max_ratio", ratio);

    match forced_slab {
        Some(m) => {
            let (r, _, _) = slab_ratio(u0, cfg, m.max(1), MEASURE_ITERATIONS, floor)?;
            report.measure("forced_slab_steps", m as f64);
            report.measure("forced_max_ratio", r);
            report.check(Check::at_most("max Picard ratio (forced slab)", r, CONTRACTION_LIMIT));
        }
        None => {
            report.check(Check::at_most("max Picard ratio (adapted slab)", ratio, CONTRACTION_LIMIT));
            if ratio > 0.0 {
                let (r4, _, _) = slab_ratio(u0, cfg, 4 * slab, MEASURE_ITERATIONS, floor)?;
                report.measure("long_slab_max_ratio", r4);
                report.check(Check::holds("ratio grows on a 4x longer slab", r4 > ratio));
            }
        }
    }
    Ok(report)
}

/// Stability constant `R(delta)` for each perturbation size, where
/// `R = (sup ||u - v||^2_{H^{s+1/2}} + beta_eff int ||u - v||^2_{H^{s+2}}) / ||u0 - v0||^2_{H^{s+1/2}}`.
pub fn lipschitz_constants(u0: &RealField, perturbation: &RealField, deltas: &[f64], cfg: &EvolveConfig) -> Result<Vec<f64>> {
    u0.grid().check_same(perturbation.grid())?;
    let mut starts = vec![u0.clone()];
    starts.extend(deltas.iter().map(|&d| u0 + &perturbation.scale(d)));
    let runs: Vec<Result<Trajectory>> = starts.par_iter().map(|v0| evolve(v0, cfg).and_then(finished)).collect();
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let base = runs.remove(0);
    let half = cfg.s.shifted(0.5);
    let two = cfg.s.shifted(2.0);
    Ok(runs
        .iter()
        .map(|run| {
            let beta = base
                .b_min
                .iter()
                .chain(&run.b_min)
                .copied()
                .fold(f64::INFINITY, f64::min);
            let diffs: Vec<RealField> = base.fields.iter().zip(&run.fields).map(|(a, b)| a - b).collect();
            let sup = diffs.iter().map(|d| sobolev_norm_sq(d, half)).fold(0.0, f64::max);
            let strong: Vec<f64> = diffs.iter().map(|d| sobolev_norm_sq(d, two)).collect();
            let integral: f64 = base
                .times
                .windows(2)
                .zip(strong.windows(2))
                .map(|(t, q)| 0.5 * (t[1] - t[0]) * (q[0] + q[1]))
                .sum();
            let d0 = sobolev_norm_sq(&diffs[0], half);
            (sup + beta * integral) / d0
        })
        .collect())
}

/// `R(delta)` over `deltas` (positive, strictly decreasing, at least three);
/// passes when the ratio between the two smallest lies in [0.8, 1.25].
pub fn lipschitz_study(u0: &RealField, perturbation: &RealField, deltas: &[f64], cfg: &EvolveConfig) -> Result<StudyReport> {
    cfg.validate()?;
    if deltas.len() < 3 {
        return Err(Error::InvalidParameter("lipschitz study needs at least three deltas".into()));
    }
    if deltas.iter().any(|&d| !(d > 0.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("deltas must be positive and strictly decreasing".into()));
    }
    if perturbation.max_abs() == 0.0 {
        return Err(Error::InvalidParameter("perturbation is identically zero".into()));
    }
    let extra = format!("deltas={deltas:?} u0={} p={}", field_digest(u0), field_digest(perturbation));
    let mut report = StudyReport::new("lipschitz", &describe(cfg, &extra), Some(Environment::from_config(cfg, None)));
    let r = lipschitz_constants(u0, perturbation, deltas, cfg)?;
    for (d, v) in deltas.iter().zip(&r) {
        report.measure(format!("R(delta={d:e})"), *v);
    }
    let k = r.len();
    let ratio = r[k - 2] / r[k - 1];
    report.measure("R_ratio_two_smallest", ratio);
    report.check(Check::between("R ratio over the two smallest deltas", ratio, LIPSCHITZ_WINDOW.0, LIPSCHITZ_WINDOW.1));
    Ok(report)
}

/// The same problem with twice the modes and half the time step.
pub fn refined(u0: &RealField, cfg: &EvolveConfig) -> Result<(RealField, EvolveConfig)> {
    let g = cfg.bg.grid();
    let fine = if g.hilbert_sign() < 0.0 {
        SpectralGrid::with_flipped_hilbert(2 * g.n(), g.length())?
    } else {
        SpectralGrid::new(2 * g.n(), g.length())?
    };
    let mut c = cfg.clone();
    c.bg = Background::from_kind(&fine, cfg.bg.kind(), cfg.bg.inner_fraction())?;
    c.dt = cfg.dt / 2.0;
    c.output_stride = 2 * cfg.output_stride;
    Ok((resample(u0, &fine)?, c))
}

/// Smoothing functional `int ||d^{s+2} u||^2 dt / M0^2` at the configured
/// resolution and at (2n, dt/2); passes when the two differ by under 5%.
pub fn smoothing_study(u0: &RealField, cfg: &EvolveConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let extra = format!("u0={}", field_digest(u0));
    let mut report = StudyReport::new("smoothing", &describe(cfg, &extra), Some(Environment::from_config(cfg, None)));
    let (u0_fine, cfg_fine) = refined(u0, cfg)?;
    let (coarse, fine) = rayon::join(
        || evolve(u0, cfg).and_then(finished),
        || evolve(&u0_fine, &cfg_fine).and_then(finished),
    );
    let (coarse, fine) = (coarse?, fine?);
    let a = smoothing_integral(&coarse)?;
    let b = smoothing_integral(&fine)?;
    let bound = uniform_bound_check(&coarse);
    report.measure("m0_sq", a.m0_sq);
    report.measure("smoothing_value", a.value);
    report.measure("smoothing_ratio", a.ratio);
    report.measure("refined_smoothing_value", b.value);
    report.measure("refined_smoothing_ratio", b.ratio);
    report.measure("uniform_bound_lhs", bound.lhs);
    report.measure("uniform_bound_8m0_sq", bound.bound);
    let drift = if a.ratio != 0.0 { (b.ratio - a.ratio).abs() / a.ratio.abs() } else { (b.ratio - a.ratio).abs() };
    report.measure("refinement_drift", drift);
    report.check(Check::holds("smoothing integral finite", a.value.is_finite() && b.value.is_finite()));
    report.check(Check::at_most("smoothing ratio drift under refinement", drift, SMOOTHING_DRIFT_LIMIT));
    Ok(report)
}

/// Richardson ratios of `||u^eps(T) - u^{eps'}(T)||_{H^{s+1/2}}` along
/// `eps_list`; each must lie in [1.7, 2.3].
pub fn viscosity_study(u0: &RealField, cfg: &EvolveConfig, eps_list: &[f64]) -> Result<StudyReport> {
    cfg.validate()?;
    if eps_list.len() < 3 {
        return Err(Error::InvalidParameter("viscosity study needs at least three viscosities".into()));
    }
    let extra = format!("eps={eps_list:?} u0={}", field_digest(u0));
    let mut report = StudyReport::new("viscosity-limit", &describe(cfg, &extra), Some(Environment::from_config(cfg, None)));
    let sweep = viscosity_sweep(u0, cfg, eps_list)?;
    if sweep.partial {
        let failed = sweep.epsilons.iter().zip(&sweep.finals).find(|(_, f)| f.is_none()).map(|(e, _)| *e);
        return Err(Error::RunAborted {
            t: f64::NAN,
            reason: format!("run with epsilon = {:?} did not reach t_final", failed.unwrap_or(f64::NAN)),
        });
    }
    for (e, d) in sweep.epsilons.windows(2).zip(&sweep.successive) {
        report.measure(format!("dist(eps={:e}, eps={:e})", e[0], e[1]), *d);
    }
    if let Some(rate) = sweep.rate {
        report.measure("rate_to_smallest", rate);
    }
    for (i, r) in sweep.ratios.iter().enumerate() {
        report.check(Check::between(
            format!("Richardson ratio {}", i + 1),
            *r,
            VISCOSITY_WINDOW.0,
            VISCOSITY_WINDOW.1,
        ));
    }
    Ok(report)
}
