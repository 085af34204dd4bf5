use rayon::prelude::*;

use super::config::{EvolveConfig, Scheme};
use crate::crystal::{big_b, evaluate};
use crate::error::{Error, Result};
use crate::linear::{blow_up_check, linear_step, step_count, StepEnergy};
use crate::spectral::{sobolev_norm, RealField, SobolevIndex};
use crate::trajectory::{Abort, Trajectory};

/// Consecutive fast slabs before the slab length is doubled.
const FAST_SLABS_TO_GROW: usize = 5;
/// A slab is fast when it converges in fewer iterations than this.
const FAST_ITERATIONS: usize = 5;

fn frozen_step(
    u: &RealField,
    at: &RealField,
    cfg: &EvolveConfig,
    dt: f64,
    t: f64,
) -> Result<(RealField, StepEnergy, f64)> {
    let tower = evaluate(at, &cfg.bg, &cfg.params)?;
    if !(tower.beta_eff > 0.0) {
        return Err(Error::EllipticityLoss {
            t,
            beta_eff: tower.beta_eff,
        });
    }
    let (next, energy) = linear_step(u, &tower.b, Some(&tower.n), cfg.params.epsilon(), dt, cfg.s)?;
    Ok((next, energy, tower.beta_eff))
}

/// One step with `B` and `N` frozen at `u_n`.
pub fn step_imex(u_n: &RealField, cfg: &EvolveConfig) -> Result<RealField> {
    let (next, _, _) = frozen_step(u_n, u_n, cfg, cfg.dt, 0.0)?;
    blow_up_check(&next, sobolev_norm(u_n, SobolevIndex::new(0.0).unwrap()), cfg.dt)?;
    Ok(next)
}

/// Result of iterating over one slab.
#[derive(Clone, Debug)]
pub struct PicardSlab {
    /// States at the slab's step boundaries, starting with `u_n`.
    pub states: Vec<RealField>,
    /// `max_j ||v^{k+1}_j - v^k_j||_{H^{s-1/2}}` for each iteration.
    pub trace: Vec<f64>,
    pub converged: bool,
    pub energies: Vec<StepEnergy>,
    pub beta_eff: f64,
}

impl PicardSlab {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// Ratios `d_{k+1}/d_k` while both distances sit above `floor`.
    pub fn ratios(&self, floor: f64) -> Vec<f64> {
        self.trace
            .windows(2)
            .take_while(|w| w[1] > floor)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

/// Iterate `v^{k+1} = S(b = B[v^k], f = N[v^k]; u_n)` over `steps` steps of
/// `dt`, starting from `v^0 = u_n`, for at most `max_iter` iterations.
pub fn picard_iterate(
    u_n: &RealField,
    cfg: &EvolveConfig,
    steps: usize,
    dt: f64,
    t0: f64,
    max_iter: usize,
) -> Result<PicardSlab> {
    let norm_s = cfg.s.shifted(-0.5);
    let mut v = vec![u_n.clone(); steps + 1];
    let mut trace = Vec::new();
    let mut energies = Vec::new();
    let mut beta_eff = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_iter {
        let mut w = Vec::with_capacity(steps + 1);
        w.push(u_n.clone());
        energies.clear();
        beta_eff = f64::INFINITY;
        let mut dist: f64 = 0.0;
        for j in 0..steps {
            let t = t0 + j as f64 * dt;
            let (next, energy, beta) = frozen_step(&w[j], &v[j], cfg, dt, t)?;
            if !next.is_finite() {
                return Err(Error::BlowUp {
                    t: t + dt,
                    reason: "non-finite Picard iterate".into(),
                });
            }
            dist = dist.max(sobolev_norm(&(&next - &v[j + 1]), norm_s));
            energies.push(energy);
            beta_eff = beta_eff.min(beta);
            w.push(next);
        }
        trace.push(dist);
        v = w;
        if dist < cfg.picard_tol {
            converged = true;
            break;
        }
    }
    Ok(PicardSlab {
        states: v,
        trace,
        converged,
        energies,
        beta_eff,
    })
}

/// Picard slab of length `slab_dt` (rounded to whole steps of `cfg.dt`).
pub fn step_picard_slab(u_n: &RealField, cfg: &EvolveConfig, slab_dt: f64) -> Result<(RealField, Vec<f64>)> {
    let steps = ((slab_dt / cfg.dt).round() as usize).max(1);
    let slab = picard_iterate(u_n, cfg, steps, cfg.dt, 0.0, cfg.picard_max_iter)?;
    if !slab.converged {
        return Err(Error::PicardNonConvergence {
            iterations: slab.iterations(),
            last: slab.trace.last().copied().unwrap_or(f64::NAN),
            trace: slab.trace,
        });
    }
    Ok((slab.states.last().unwrap().clone(), slab.trace))
}

fn abort_with(mut traj: Trajectory, t: f64, err: Error) -> Result<Trajectory> {
    if !err.is_numerical_abort() {
        return Err(err);
    }
    traj.abort = Some(Abort {
        t,
        reason: err.to_string(),
    });
    Ok(traj)
}

/// March `u0` to `cfg.t_final`. Numerical aborts (blow-up, ellipticity
/// loss, guards, Picard failure) end the run early and are recorded in
/// [`Trajectory::abort`]; configuration errors are returned.
pub fn evolve(u0: &RealField, cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    u0.grid().check_same(cfg.bg.grid())?;
    let (n_steps, dt) = step_count(cfg.t_final, cfg.dt);
    let reference = sobolev_norm(u0, SobolevIndex::new(0.0).unwrap());
    let mut traj = Trajectory::new(cfg.s);
    let beta0 = match big_b(u0, &cfg.bg, &cfg.params) {
        Ok((_, beta)) => beta,
        Err(e) => return abort_with(traj, 0.0, e),
    };
    traj.push(0.0, u0.clone(), beta0, 0, 0.0);
    let record = |traj: &mut Trajectory, step: usize, u: &RealField, beta: f64, iters: usize, e: &StepEnergy| {
        if step.is_multiple_of(cfg.output_stride) || step == n_steps {
            traj.push(step as f64 * dt, u.clone(), beta, iters, e.relative_residual());
        }
    };

    let mut u = u0.clone();
    let mut step = 0;
    match cfg.scheme {
        Scheme::Imex => {
            while step < n_steps {
                let t = step as f64 * dt;
                let out = frozen_step(&u, &u, cfg, dt, t)
                    .and_then(|r| blow_up_check(&r.0, reference, t + dt).map(|_| r));
                match out {
                    Ok((next, energy, beta)) => {
                        u = next;
                        step += 1;
                        record(&mut traj, step, &u, beta, 0, &energy);
                    }
                    Err(e) => return abort_with(traj, t, e),
                }
            }
        }
        Scheme::Picard => {
            let mut slab = cfg.slab_steps;
            let mut fast = 0;
            while step < n_steps {
                let t = step as f64 * dt;
                let m = slab.min(n_steps - step);
                let run = match picard_iterate(&u, cfg, m, dt, t, cfg.picard_max_iter) {
                    Ok(r) => r,
                    Err(e) => return abort_with(traj, t, e),
                };
                if !run.converged {
                    if cfg.adapt_slab && slab > 1 {
                        slab /= 2;
                        fast = 0;
                        continue;
                    }
                    let err = Error::PicardNonConvergence {
                        iterations: run.iterations(),
                        last: run.trace.last().copied().unwrap_or(f64::NAN),
                        trace: run.trace,
                    };
                    return abort_with(traj, t, err);
                }
                let iters = run.iterations();
                for (j, (state, energy)) in run.states.iter().skip(1).zip(&run.energies).enumerate() {
                    if let Err(e) = blow_up_check(state, reference, t + (j + 1) as f64 * dt) {
                        return abort_with(traj, t + j as f64 * dt, e);
                    }
                    step += 1;
                    record(&mut traj, step, state, run.beta_eff, iters, energy);
                }
                u = run.states.last().unwrap().clone();
                if cfg.adapt_slab {
                    fast = if iters < FAST_ITERATIONS { fast + 1 } else { 0 };
                    if fast >= FAST_SLABS_TO_GROW {
                        slab = (2 * slab).min(cfg.max_slab_steps);
                        fast = 0;
                    }
                }
            }
        }
    }
    Ok(traj)
}

/// Outcome of a sweep over viscosities.
#[derive(Clone, Debug)]
pub struct ViscositySweep {
    pub epsilons: Vec<f64>,
    pub finals: Vec<Option<RealField>>,
    /// `||u^eps(T) - u^{eps_min}(T)||_{H^{s+1/2}}`, one per entry except the last.
    pub to_min: Vec<f64>,
    /// `||u^{eps_i}(T) - u^{eps_{i+1}}(T)||_{H^{s+1/2}}`.
    pub successive: Vec<f64>,
    /// `successive[i] / successive[i+1]`.
    pub ratios: Vec<f64>,
    /// Least-squares slope of `log to_min` against `log(eps - eps_min)`.
    pub rate: Option<f64>,
    /// Set when any member run aborted; the table is then partial.
    pub partial: bool,
}

/// Run `evolve` for every viscosity in `eps_list` (decreasing) in parallel.
pub fn viscosity_sweep(u0: &RealField, cfg: &EvolveConfig, eps_list: &[f64]) -> Result<ViscositySweep> {
    if eps_list.is_empty() {
        return Err(Error::InvalidParameter("empty viscosity list".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) || eps_list.last().is_some_and(|&e| e < 0.0) {
        return Err(Error::InvalidParameter(
            "viscosities must decrease strictly to a nonnegative minimum".into(),
        ));
    }
    let runs: Vec<Result<Trajectory>> = eps_list
        .par_iter()
        .map(|&eps| {
            let mut c = cfg.clone();
            c.params = cfg.params.with_epsilon(eps)?;
            evolve(u0, &c)
        })
        .collect();
    let mut finals = Vec::with_capacity(runs.len());
    for r in runs {
        let traj = r?;
        finals.push(if traj.completed() { traj.last().cloned() } else { None });
    }
    let partial = finals.iter().any(Option::is_none);
    let norm = cfg.s.shifted(0.5);
    let dist = |a: &Option<RealField>, b: &Option<RealField>| match (a, b) {
        (Some(a), Some(b)) => sobolev_norm(&(a - b), norm),
        _ => f64::NAN,
    };
    let last = finals.last().unwrap();
    let to_min: Vec<f64> = finals[..finals.len() - 1].iter().map(|f| dist(f, last)).collect();
    let successive: Vec<f64> = finals.windows(2).map(|w| dist(&w[0], &w[1])).collect();
    let ratios = successive.windows(2).map(|w| w[0] / w[1]).collect();
    let eps_min = *eps_list.last().unwrap();
    let points: Vec<(f64, f64)> = eps_list
        .iter()
        .zip(&to_min)
        .filter(|(_, d)| d.is_finite() && **d > 0.0)
        .map(|(e, d)| ((e - eps_min).ln(), d.ln()))
        .collect();
    Ok(ViscositySweep {
        epsilons: eps_list.to_vec(),
        finals,
        to_min,
        successive,
        ratios,
        rate: slope(&points),
        partial,
    })
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `sup_t ||u||^2_{H^{s+1/2}} + beta_eff int ||d^{s+2} u||^2 dt` against `8 M0^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformBound {
    pub lhs: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn uniform_bound_check(traj: &Trajectory) -> UniformBound {
    let m0 = traj.hs_half.first().copied().unwrap_or(0.0);
    let sup = traj.hs_half.iter().fold(0.0f64, |m, x| m.max(x * x));
    let beta = traj.b_min.iter().copied().fold(f64::INFINITY, f64::min);
    let integral: f64 = traj
        .times
        .windows(2)
        .zip(traj.dxs2_l2.windows(2))
        .map(|(t, d)| 0.5 * (t[1] - t[0]) * (d[0] * d[0] + d[1] * d[1]))
        .sum();
    let beta = if beta.is_finite() { beta } else { 0.0 };
    let lhs = sup + beta * integral;
    let bound = 8.0 * m0 * m0;
    UniformBound {
        lhs,
        bound,
        pass: lhs <= bound,
    }
}
