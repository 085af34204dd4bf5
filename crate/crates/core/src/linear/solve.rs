use std::fmt;
use std::sync::Arc;

use super::step::{linear_step, StepEnergy};
use crate::error::{Error, Result};
use crate::spectral::{homogeneous_norm, sobolev_norm, RealField, SobolevIndex};
use crate::trajectory::Trajectory;

/// Growth of `||u||_{L2}` (relative to `max(||u_0||, 1)`) treated as blow-up.
pub const BLOW_UP_FACTOR: f64 = 1e6;

/// Dispersive coefficient `b(xi, t)`.
#[derive(Clone, Debug)]
pub enum Coefficient {
    Fixed(RealField),
    /// One field per step; the last one is reused past the end.
    Sequence(Vec<RealField>),
}

impl Coefficient {
    fn at(&self, step: usize) -> &RealField {
        match self {
            Self::Fixed(b) => b,
            Self::Sequence(v) => &v[step.min(v.len() - 1)],
        }
    }

    fn fields(&self) -> &[RealField] {
        match self {
            Self::Fixed(b) => std::slice::from_ref(b),
            Self::Sequence(v) => v,
        }
    }
}

/// Right-hand side `f(xi, t)`, sampled at the start of each step.
#[derive(Clone)]
pub enum Forcing {
    Zero,
    Fixed(RealField),
    /// One field per step; the last one is reused past the end.
    Steps(Vec<RealField>),
    Function(Arc<dyn Fn(f64) -> RealField + Send + Sync>),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => f.write_str("Zero"),
            Self::Fixed(_) => f.write_str("Fixed(..)"),
            Self::Steps(v) => write!(f, "Steps({})", v.len()),
            Self::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl Forcing {
    fn at(&self, step: usize, t: f64) -> Option<RealField> {
        match self {
            Self::Zero => None,
            Self::Fixed(f) => Some(f.clone()),
            Self::Steps(v) if v.is_empty() => None,
            Self::Steps(v) => Some(v[step.min(v.len() - 1)].clone()),
            Self::Function(g) => Some(g(t)),
        }
    }
}

/// `u_t + b H[d^3 u] - eps d^6 u = f`, `u(0) = u0`, on `[0, t_final]`.
#[derive(Clone, Debug)]
pub struct LinearProblem {
    pub b: Coefficient,
    pub f: Forcing,
    pub epsilon: f64,
    pub u0: RealField,
    pub t_final: f64,
    pub dt: f64,
    /// Steps between recorded snapshots.
    pub output_stride: usize,
}

impl LinearProblem {
    pub fn new(b: Coefficient, u0: RealField, epsilon: f64, t_final: f64, dt: f64) -> Result<Self> {
        let p = Self {
            b,
            f: Forcing::Zero,
            epsilon,
            u0,
            t_final,
            dt,
            output_stride: 1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_forcing(mut self, f: Forcing) -> Self {
        self.f = f;
        self
    }

    pub fn with_output_stride(mut self, stride: usize) -> Self {
        self.output_stride = stride.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = self.b.fields();
        if fields.is_empty() {
            return Err(Error::InvalidParameter("empty coefficient sequence".into()));
        }
        for b in fields {
            self.u0.grid().check_same(b.grid())?;
            if !(b.min() > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "coefficient minimum {} must be positive",
                    b.min()
                )));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.dt) {
            return Err(Error::InvalidParameter(format!(
                "t_final = {} must be at least dt = {}",
                self.t_final, self.dt
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon = {} must be >= 0", self.epsilon)));
        }
        Ok(())
    }
}

/// Number of steps and the step actually taken so that they tile `t_final`.
pub fn step_count(t_final: f64, dt: f64) -> (usize, f64) {
    let n = ((t_final / dt).round() as usize).max(1);
    (n, t_final / n as f64)
}

/// One ledger row per step.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerRow {
    /// Time at the end of the step.
    pub t: f64,
    /// `||u||^2_{H^{s+1/2}}` at the end of the step.
    pub norm_sq: f64,
    /// `b_min ||d^{s+2} u||^2`.
    pub dispersive: f64,
    /// `eps ||d^{s+3} u||^2`.
    pub viscous: f64,
    pub energy: StepEnergy,
}

#[derive(Clone, Debug, Default)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
}

/// Summary of a ledger.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerReport {
    /// Largest per-step residual relative to the squared norm.
    pub max_relative_residual: f64,
    pub max_l2_residual: f64,
    /// `||u_0||^2 - ||u_N||^2` in `L2`.
    pub l2_decrease: f64,
    pub l2_dissipation: f64,
    pub l2_forcing: f64,
    pub dissipation_nonnegative: bool,
}

pub fn energy_ledger_check(ledger: &EnergyLedger) -> LedgerReport {
    let mut r = LedgerReport {
        max_relative_residual: 0.0,
        max_l2_residual: 0.0,
        l2_decrease: 0.0,
        l2_dissipation: 0.0,
        l2_forcing: 0.0,
        dissipation_nonnegative: true,
    };
    for row in &ledger.rows {
        let e = &row.energy;
        r.max_relative_residual = r.max_relative_residual.max(e.relative_residual());
        r.max_l2_residual = r.max_l2_residual.max(e.l2_residual().abs());
        r.l2_decrease += e.l2_before - e.l2_after;
        r.l2_dissipation += e.l2_dissipation;
        r.l2_forcing += e.l2_forcing;
        if e.l2_dissipation < 0.0 || e.hs_dissipation < 0.0 || row.dispersive < 0.0 || row.viscous < 0.0 {
            r.dissipation_nonnegative = false;
        }
    }
    r
}

pub(crate) fn blow_up_check(u: &RealField, reference: f64, t: f64) -> Result<()> {
    if !u.is_finite() {
        return Err(Error::BlowUp {
            t,
            reason: "non-finite samples".into(),
        });
    }
    let norm = sobolev_norm(u, SobolevIndex::new(0.0).unwrap());
    let limit = BLOW_UP_FACTOR * reference.max(1.0);
    if norm > limit {
        return Err(Error::BlowUp {
            t,
            reason: format!("||u||_L2 = {norm:.3e} exceeds {limit:.3e}"),
        });
    }
    Ok(())
}

/// March the linear problem to `t_final` by [`linear_step`].
pub fn solve_linear_ivp(prob: &LinearProblem, s: SobolevIndex) -> Result<(Trajectory, EnergyLedger)> {
    prob.validate()?;
    let (n_steps, dt) = step_count(prob.t_final, prob.dt);
    let reference = sobolev_norm(&prob.u0, SobolevIndex::new(0.0).unwrap());
    let mut traj = Trajectory::new(s);
    let mut ledger = EnergyLedger::default();
    let mut u = prob.u0.clone();
    traj.push(0.0, u.clone(), prob.b.at(0).min(), 0, 0.0);
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let b = prob.b.at(step);
        let f = prob.f.at(step, t);
        let (next, energy) = linear_step(&u, b, f.as_ref(), prob.epsilon, dt, s)?;
        let t1 = (step + 1) as f64 * dt;
        blow_up_check(&next, reference, t1)?;
        u = next;
        let b_min = b.min();
        ledger.rows.push(LedgerRow {
            t: t1,
            norm_sq: energy.hs_after,
            dispersive: b_min * homogeneous_norm(&u, s.value() + 2.0).powi(2),
            viscous: prob.epsilon * homogeneous_norm(&u, s.value() + 3.0).powi(2),
            energy,
        });
        if (step + 1) % prob.output_stride == 0 || step + 1 == n_steps {
            traj.push(t1, u.clone(), b_min, 0, energy.relative_residual());
        }
    }
    Ok((traj, ledger))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::linstep_constant_b;
    use crate::spectral::{derivative, hilbert, SpectralGrid};
    use std::f64::consts::PI;

    fn grid(n: usize) -> Arc<SpectralGrid> {
        SpectralGrid::new(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn constant_b_matches_exact_step() {
        let g = grid(64);
        let u0 = RealField::from_fn(&g, |x| x.sin() + 0.3 * (4.0 * x).cos());
        let b = RealField::constant(&g, 0.4);
        let p = LinearProblem::new(Coefficient::Fixed(b), u0.clone(), 1e-3, 0.5, 0.01).unwrap();
        let (traj, ledger) = solve_linear_ivp(&p, SobolevIndex::new(2.0).unwrap()).unwrap();
        let mut v = u0;
        let z = RealField::zeros(&g);
        for _ in 0..50 {
            v = linstep_constant_b(&v, &z, 0.4, 1e-3, 0.01).unwrap();
        }
        assert!(traj.last().unwrap().max_distance(&v) < 1e-13);
        assert_eq!(traj.len(), 51);
        let r = energy_ledger_check(&ledger);
        assert!(r.max_relative_residual < 1e-10, "{r:?}");
        assert!(r.dissipation_nonnegative);
    }

    #[test]
    fn variable_b_is_dissipative() {
        for n in [64, 128] {
            let g = grid(n);
            let u0 = RealField::from_fn(&g, |x| (2.0 * x).sin());
            let b = RealField::from_fn(&g, |x| 0.4 + 0.1 * x.sin());
            let dt = 0.4 / (0.1 * g.lambda_max().powi(3));
            let p = LinearProblem::new(Coefficient::Fixed(b), u0, 0.0, 1.0, dt).unwrap();
            let (traj, ledger) = solve_linear_ivp(&p, SobolevIndex::new(1.0).unwrap()).unwrap();
            for w in traj.l2.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
            let r = energy_ledger_check(&ledger);
            let budget = r.l2_dissipation - r.l2_forcing;
            assert!((r.l2_decrease - budget).abs() < 1e-2 * r.l2_decrease, "{r:?}");
        }
    }

    #[test]
    fn ledger_error_is_first_order() {
        let g = grid(16);
        let u0 = RealField::from_fn(&g, |x| (2.0 * x).sin());
        let b = RealField::from_fn(&g, |x| 0.4 + 0.1 * x.cos());
        let gap = |dt: f64| {
            let p = LinearProblem::new(Coefficient::Fixed(b.clone()), u0.clone(), 0.0, 0.5, dt).unwrap();
            let (_, ledger) = solve_linear_ivp(&p, SobolevIndex::new(1.0).unwrap()).unwrap();
            let r = energy_ledger_check(&ledger);
            (r.l2_decrease - r.l2_dissipation + r.l2_forcing).abs()
        };
        let (a, b2) = (gap(1e-3), gap(5e-4));
        assert!(b2 < 0.7 * a, "{a} {b2}");
    }

    #[test]
    fn manufactured_solution() {
        // u* = e^{-t} sin xi, f = u*_t + b H[d^3 u*] - eps d^6 u*
        let g = grid(16);
        let b = RealField::from_fn(&g, |x| 1.0 + 0.2 * x.cos());
        let eps = 1e-3;
        let exact = |t: f64| RealField::from_fn(&g, |x| (-t).exp() * x.sin());
        let forcing = {
            let (g, b) = (g.clone(), b.clone());
            move |t: f64| {
                let u = RealField::from_fn(&g, |x| (-t).exp() * x.sin());
                let disp = &b * &hilbert(&derivative(&u, 3));
                &(&(-&u) + &disp) - &derivative(&u, 6).scale(eps)
            }
        };
        let err = |dt: f64| {
            let p = LinearProblem::new(Coefficient::Fixed(b.clone()), exact(0.0), eps, 1.0, dt)
                .unwrap()
                .with_forcing(Forcing::Function(Arc::new(forcing.clone())));
            let (traj, _) = solve_linear_ivp(&p, SobolevIndex::new(1.0).unwrap()).unwrap();
            traj.last().unwrap().l2_distance(&exact(1.0))
        };
        let (e1, e2) = (err(2e-3), err(1e-3));
        assert!(e1 < 1e-2);
        assert!((e1 / e2 - 2.0).abs() < 0.1, "{e1} {e2}");
    }

    #[test]
    fn viscosity_ordering() {
        let g = grid(64);
        let u0 = RealField::from_fn(&g, |x| x.sin() + (3.0 * x).sin());
        let b = Coefficient::Fixed(RealField::constant(&g, 0.5));
        let mut prev = 0.0;
        for eps in [1e-1, 1e-2, 1e-3, 0.0] {
            let p = LinearProblem::new(b.clone(), u0.clone(), eps, 0.2, 0.01).unwrap();
            let (traj, _) = solve_linear_ivp(&p, SobolevIndex::new(0.0).unwrap()).unwrap();
            let l2 = *traj.l2.last().unwrap();
            assert!(l2 >= prev);
            prev = l2;
        }
    }

    #[test]
    fn zero_solution_ledger() {
        let g = grid(32);
        let p = LinearProblem::new(
            Coefficient::Fixed(RealField::constant(&g, 1.0)),
            RealField::zeros(&g),
            0.0,
            0.1,
            0.01,
        )
        .unwrap();
        let (traj, ledger) = solve_linear_ivp(&p, SobolevIndex::new(5.0).unwrap()).unwrap();
        assert!(traj.fields.iter().all(|f| f.max_abs() == 0.0));
        for row in &ledger.rows {
            assert_eq!(row.norm_sq, 0.0);
            assert_eq!(row.energy.hs_residual(), 0.0);
            assert_eq!(row.dispersive, 0.0);
        }
    }

    #[test]
    fn rejects_bad_problems() {
        let g = grid(32);
        let u0 = RealField::zeros(&g);
        let neg = Coefficient::Fixed(RealField::constant(&g, -1.0));
        assert!(LinearProblem::new(neg, u0.clone(), 0.0, 1.0, 0.1).is_err());
        let b = Coefficient::Fixed(RealField::constant(&g, 1.0));
        assert!(LinearProblem::new(b.clone(), u0.clone(), 0.0, 0.01, 0.1).is_err());
        assert!(LinearProblem::new(b, u0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn blow_up_is_detected() {
        let g = grid(32);
        let u = RealField::constant(&g, 1e7);
        assert!(matches!(blow_up_check(&u, 1.0, 0.5), Err(Error::BlowUp { .. })));
        assert!(blow_up_check(&RealField::constant(&g, 1.0), 1.0, 0.5).is_ok());
    }
}
