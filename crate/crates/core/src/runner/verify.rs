use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::crystal::{
    curvature, evaluate, identity_residuals, q_decomposed, q_direct, rhs, rhs_n, Background, PhysicsParams,
};
use crate::diagnostics::{Check, StudyReport, Threshold};
use crate::error::Result;
use crate::evolution::{evolve, EvolveConfig, Scheme};
use crate::linear::{energy_ledger_check, solve_linear_ivp, Coefficient, Forcing, LinearProblem};
use crate::spectral::{
    derivative, frac_derivative, hilbert, hilbert_residuals, product, random_bandlimited, sobolev_norm, RealField,
    SobolevIndex, SpectralGrid,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub n: usize,
    pub length: f64,
    pub seed: u64,
    /// Build every grid with the wrong Hilbert sign (mutation sanity run).
    pub flip_hilbert: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n: 256,
            length: 40.0,
            seed: 42,
            flip_hilbert: false,
        }
    }
}

struct Suite {
    opts: VerifyOptions,
    report: StudyReport,
}

impl Suite {
    fn grid(&self, n: usize, length: f64) -> Result<Arc<SpectralGrid>> {
        if self.opts.flip_hilbert {
            SpectralGrid::with_flipped_hilbert(n, length)
        } else {
            SpectralGrid::new(n, length)
        }
    }

    /// Records a failing check with a NaN value when `measure` errors.
    fn run(&mut self, name: &str, threshold: Threshold, measure: impl FnOnce(&Self) -> Result<f64>) {
        let value = measure(self).unwrap_or(f64::NAN);
        self.report.check(Check::new(name, value, threshold));
    }
}

fn at_most(limit: f64) -> Threshold {
    Threshold::AtMost { limit }
}

fn rel(a: &RealField, b: &RealField) -> f64 {
    a.max_distance(b) / b.max_abs().max(f64::MIN_POSITIVE)
}

fn mode(g: &Arc<SpectralGrid>, k: f64, phase: fn(f64) -> f64) -> (f64, RealField) {
    let w = 2.0 * PI * k / g.length();
    (w, RealField::from_fn(g, |x| phase(w * x)))
}

/// Operator identities, route equivalence, decay laws and steady states.
/// Failures are reported, never thrown.
pub fn verify_suite(opts: VerifyOptions) -> StudyReport {
    let inputs = format!("verify n={} L={:?} seed={} flip={}", opts.n, opts.length, opts.seed, opts.flip_hilbert);
    let mut s = Suite {
        opts,
        report: StudyReport::new("verify", &inputs, None),
    };
    let (n, l) = (opts.n, opts.length);

    s.run("hilbert maps sin to cos", at_most(1e-12), |s| {
        let g = s.grid(n, l)?;
        let (_, sin) = mode(&g, 3.0, f64::sin);
        let (_, cos) = mode(&g, 3.0, f64::cos);
        Ok(hilbert(&sin).max_distance(&cos))
    });

    s.run("hilbert identities on random fields", at_most(1e-10), |s| {
        let g = s.grid(n, l)?;
        let mut rng = ChaCha8Rng::seed_from_u64(s.opts.seed);
        let kmax = (n / 4 - 1).min(24);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let f = random_bandlimited(&g, kmax, 1.0, &mut rng)?;
            let h = random_bandlimited(&g, kmax, 1.0, &mut rng)?;
            worst = worst.max(hilbert_residuals(&f, &h)?.max());
        }
        Ok(worst)
    });

    s.run("|D| equals -H d", at_most(1e-10), |s| {
        let g = s.grid(n, l)?;
        let f = random_bandlimited(&g, 16, 1.0, &mut ChaCha8Rng::seed_from_u64(s.opts.seed + 1))?;
        Ok(rel(&(-&hilbert(&derivative(&f, 1))), &frac_derivative(&f, 1.0)))
    });

    s.run("third derivative of sin", at_most(1e-10), |s| {
        let g = s.grid(n, l)?;
        let (w, sin) = mode(&g, 5.0, f64::sin);
        let (_, cos) = mode(&g, 5.0, f64::cos);
        Ok(rel(&derivative(&sin, 3), &cos.scale(-w.powi(3))))
    });

    s.run("dealiased product of modes", at_most(1e-12), |s| {
        let g = s.grid(n, l)?;
        let (_, a) = mode(&g, 3.0, f64::sin);
        let (_, b) = mode(&g, 5.0, f64::sin);
        let (_, c2) = mode(&g, 2.0, f64::cos);
        let (_, c8) = mode(&g, 8.0, f64::cos);
        Ok(product(&a, &b, true)?.max_distance(&(&c2 - &c8).scale(0.5)))
    });

    for (label, ivantsov) in [("flat", false), ("ivantsov", true)] {
        let fields = |s: &Suite| -> Result<(Background, PhysicsParams, Vec<RealField>)> {
            let g = s.grid(n, l)?;
            let bg = if ivantsov { Background::ivantsov(&g, 0.6)? } else { Background::flat(&g) };
            let p = PhysicsParams::new(1.0, 0.2, 0.0)?;
            let mut rng = ChaCha8Rng::seed_from_u64(s.opts.seed + 2);
            let us = (0..4)
                .map(|_| {
                    let u = random_bandlimited(&g, 12, 1.0, &mut rng)?;
                    let norm = sobolev_norm(&u, SobolevIndex::new(5.0)?);
                    Ok(u.scale(0.5 / norm))
                })
                .collect::<Result<_>>()?;
            Ok((bg, p, us))
        };
        s.run(&format!("route equivalence ({label})"), at_most(1e-9), |s| {
            let (bg, p, us) = fields(s)?;
            us.iter().try_fold(0.0f64, |m, u| {
                let d = q_direct(u, &bg, &p)?;
                Ok(m.max(d.l2_distance(&q_decomposed(u, &bg, &p)?) / d.l2_distance(&RealField::zeros(d.grid()))))
            })
        });
        s.run(&format!("tower identities ({label})"), at_most(1e-9), |s| {
            let (bg, p, us) = fields(s)?;
            us.iter().try_fold(0.0f64, |m, u| {
                let r = identity_residuals(&evaluate(u, &bg, &p)?);
                Ok(m.max(r.derivative).max(r.hilbert))
            })
        });
    }

    s.run("linear dispersion law", at_most(1e-8), |s| {
        let g = s.grid(n, l)?;
        let (w, u0) = mode(&g, 4.0, f64::sin);
        let (b, eps, dt) = (0.4, 1e-3, 1e-3);
        let p = LinearProblem::new(Coefficient::Fixed(RealField::constant(&g, b)), u0.clone(), eps, 100.0 * dt, dt)?;
        let (traj, _) = solve_linear_ivp(&p, SobolevIndex::new(0.0)?)?;
        let decay = (-(b * w.powi(3) + eps * w.powi(6)) * 100.0 * dt).exp();
        Ok(rel(traj.last().unwrap(), &u0.scale(decay)))
    });

    s.run("manufactured solution first order", Threshold::Between { low: 1.8, high: 2.2 }, |s| {
        // u* = e^{-t} sin xi with H d^3 sin = sin, d^6 sin = -sin
        let g = s.grid(16, 2.0 * PI)?;
        let b = RealField::from_fn(&g, |x| 1.0 + 0.2 * x.cos());
        let eps = 1e-3;
        let shape = RealField::from_fn(&g, f64::sin);
        let coef = (&b + (eps - 1.0)).zip_map(&shape, |c, s| c * s)?;
        let err = |dt: f64| -> Result<f64> {
            let coef = coef.clone();
            let p = LinearProblem::new(Coefficient::Fixed(b.clone()), shape.clone(), eps, 1.0, dt)?
                .with_forcing(Forcing::Function(Arc::new(move |t: f64| coef.scale((-t).exp()))));
            let (traj, _) = solve_linear_ivp(&p, SobolevIndex::new(1.0)?)?;
            Ok(traj.last().unwrap().l2_distance(&shape.scale((-1.0f64).exp())))
        };
        Ok(err(2e-3)? / err(1e-3)?)
    });

    s.run("energy ledger closes", at_most(1e-10), |s| {
        let g = s.grid(64, 2.0 * PI)?;
        let u0 = RealField::from_fn(&g, |x| x.sin() + 0.3 * (4.0 * x).cos());
        let p = LinearProblem::new(Coefficient::Fixed(RealField::constant(&g, 0.4)), u0, 1e-3, 0.5, 0.01)?;
        let (_, ledger) = solve_linear_ivp(&p, SobolevIndex::new(2.0)?)?;
        let r = energy_ledger_check(&ledger);
        Ok(if r.dissipation_nonnegative { r.max_relative_residual } else { f64::INFINITY })
    });

    s.run("needle tip curvature", at_most(0.15), |s| {
        let g = s.grid(n, l)?;
        let bg = Background::ivantsov(&g, 0.6)?;
        let k = curvature(&RealField::zeros(&g), &bg)?;
        Ok((k.samples()[n / 2] - 1.0).abs())
    });

    s.run("flat curvature linearisation", at_most(2e-4), |s| {
        let g = s.grid(64, 2.0 * PI)?;
        let bg = Background::flat(&g);
        let d = 1e-4;
        let k = curvature(&RealField::from_fn(&g, |x| d * x.sin()), &bg)?;
        Ok(k.max_distance(&RealField::from_fn(&g, |x| -d * x.sin())) / d)
    });

    s.run("flat linear growth rate |lambda|", at_most(1e-3), |s| {
        let g = s.grid(n, l)?;
        let bg = Background::flat(&g);
        let p = PhysicsParams::new(1.0, 0.0, 0.0)?;
        let d = 1e-5;
        let (w, sin) = mode(&g, 3.0, f64::sin);
        let nl = rhs_n(&sin.scale(d), &bg, &p)?;
        Ok(rel(&nl.scale(1.0 / d), &sin.scale(w)))
    });

    s.run("ivantsov residual falls as L doubles", Threshold::AtLeast { limit: 1.0 }, |s| {
        let p = PhysicsParams::zero_surface_tension(0.0)?;
        let sup = |n: usize, l: f64| -> Result<f64> {
            let g = s.grid(n, l)?;
            let bg = Background::ivantsov(&g, 0.6)?;
            let r = rhs(&RealField::zeros(&g), &bg, &p)?;
            let half = bg.inner_half_width();
            Ok(g.nodes()
                .iter()
                .zip(r.samples())
                .filter(|(x, _)| x.abs() <= half)
                .fold(0.0, |m, (_, v)| m.max(v.abs())))
        };
        Ok(sup(n, l)? / sup(2 * n, 2.0 * l)?.max(f64::MIN_POSITIVE))
    });

    for scheme in [Scheme::Imex, Scheme::Picard] {
        s.run(&format!("zero steady state ({scheme})"), at_most(1e-14), |s| {
            let g = s.grid(n, l)?;
            let cfg = EvolveConfig::new(
                PhysicsParams::new(1.0, 0.0, 0.0)?,
                Background::flat(&g),
                SobolevIndex::new(5.0)?,
                1e-4,
                2e-3,
            )
            .with_scheme(scheme);
            let traj = evolve(&RealField::zeros(&g), &cfg)?;
            Ok(if traj.completed() {
                traj.fields.iter().map(RealField::max_abs).fold(0.0, f64::max)
            } else {
                f64::INFINITY
            })
        });
    }

    s.run("small data decays", Threshold::AtLeast { limit: 1.0 }, |s| {
        let g = s.grid(16, 2.0 * PI)?;
        let cfg = EvolveConfig::new(
            PhysicsParams::new(1.0, 0.0, 0.0)?,
            Background::flat(&g),
            SobolevIndex::new(5.0)?,
            1e-3,
            0.2,
        )
        .with_output_stride(10);
        let traj = evolve(&RealField::from_fn(&g, |x| 0.01 * (2.0 * x).sin()), &cfg)?;
        let monotone = traj.completed() && traj.hs_half.windows(2).all(|w| w[1] <= w[0]);
        Ok(if monotone { traj.hs_half[0] / traj.hs_half.last().unwrap() } else { 0.0 })
    });

    s.report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pristine_suite_passes() {
        let r = verify_suite(VerifyOptions::default());
        assert!(r.passed(), "{r}");
        assert!(r.checks.len() >= 15);
        assert_eq!(r, verify_suite(VerifyOptions::default()));
    }

    #[test]
    fn flipped_hilbert_is_caught() {
        let r = verify_suite(VerifyOptions {
            flip_hilbert: true,
            ..VerifyOptions::default()
        });
        let failed: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
        assert!(failed.len() >= 5, "{r}");
    }
}
