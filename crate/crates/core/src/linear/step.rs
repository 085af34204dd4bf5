use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::spectral::{derivative, hilbert, mean, product, RealField, SobolevIndex};

/// Bound on `dt max|b - mean b| lambda_max^3` for the explicit remainder.
pub const STABILITY_LIMIT: f64 = 0.5;

/// `(e^z - 1)/z`, continuous at zero.
pub fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// Exact integrator for `u_t + sigma(D) u = f` over `dt`, with `f` frozen.
fn exponential_step(
    u: &RealField,
    f: Option<&RealField>,
    dt: f64,
    sigma: impl Fn(f64) -> f64,
) -> Result<RealField> {
    if let Some(f) = f {
        u.grid().check_same(f.grid())?;
    }
    let grid = u.grid();
    let mut cu = u.spectrum();
    let cf = f.map(|f| f.spectrum());
    for (j, &lam) in grid.wavenumbers().iter().enumerate() {
        let z = -sigma(lam) * dt;
        cu[j] *= z.exp();
        if let Some(cf) = &cf {
            cu[j] += cf[j] * (phi1(z) * dt);
        }
    }
    Ok(RealField::from_spectrum(grid, cu))
}

/// One exact step of `u_t - eps d^6 u = f`.
pub fn heat6_step(u: &RealField, f: &RealField, epsilon: f64, dt: f64) -> Result<RealField> {
    check_step(epsilon, dt)?;
    exponential_step(u, Some(f), dt, |lam| epsilon * lam.powi(6))
}

/// One exact step of `u_t + b H[d^3 u] - eps d^6 u = f` with constant `b`.
pub fn linstep_constant_b(
    u: &RealField,
    f: &RealField,
    b: f64,
    epsilon: f64,
    dt: f64,
) -> Result<RealField> {
    check_step(epsilon, dt)?;
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidParameter(format!("coefficient b = {b} must be positive")));
    }
    exponential_step(u, Some(f), dt, |lam| b * lam.abs().powi(3) + epsilon * lam.powi(6))
}

fn check_step(epsilon: f64, dt: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be >= 0")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
    }
    Ok(())
}

/// Energy bookkeeping of one step, in `L2` and in `H^{s+1/2}`.
///
/// `dissipation` is what the exact part removes, `L sum (1 - E_k^2)|c_k|^2`;
/// `forcing` is `2 dt <u_n, R>` with `R` the explicit part. The residual
/// `||u_{n+1}||^2 - ||u_n||^2 + dissipation - forcing` vanishes to roundoff
/// when `R = 0` and is `O(dt^2)` per step otherwise.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepEnergy {
    pub l2_before: f64,
    pub l2_after: f64,
    pub l2_dissipation: f64,
    pub l2_forcing: f64,
    pub hs_before: f64,
    pub hs_after: f64,
    pub hs_dissipation: f64,
    pub hs_forcing: f64,
}

impl StepEnergy {
    pub fn l2_residual(&self) -> f64 {
        self.l2_after - self.l2_before + self.l2_dissipation - self.l2_forcing
    }

    pub fn hs_residual(&self) -> f64 {
        self.hs_after - self.hs_before + self.hs_dissipation - self.hs_forcing
    }

    /// `hs_residual` relative to the largest squared norm involved.
    pub fn relative_residual(&self) -> f64 {
        let scale = self.hs_before.max(self.hs_after);
        if scale == 0.0 {
            self.hs_residual().abs()
        } else {
            self.hs_residual().abs() / scale
        }
    }
}

/// One step of `u_t + b H[d^3 u] - eps d^6 u = f` for variable `b`: the
/// mean part `mean(b)|lambda|^3 + eps lambda^6` is integrated exactly and
/// `f - (b - mean b) H[d^3 u]` explicitly.
pub fn linear_step(
    u: &RealField,
    b: &RealField,
    f: Option<&RealField>,
    epsilon: f64,
    dt: f64,
    s: SobolevIndex,
) -> Result<(RealField, StepEnergy)> {
    check_step(epsilon, dt)?;
    let grid = u.grid();
    grid.check_same(b.grid())?;
    let b_mean = mean(b);
    let db = b.map(|x| x - b_mean);
    let spread = db.max_abs();
    let guard = dt * spread * grid.lambda_max().powi(3);
    if !(guard <= STABILITY_LIMIT) {
        return Err(Error::StabilityGuard {
            value: guard,
            limit: STABILITY_LIMIT,
        });
    }
    let explicit = if spread > 0.0 {
        let r = product(&db, &hilbert(&derivative(u, 3)), true)?;
        Some(match f {
            Some(f) => f - &r,
            None => -&r,
        })
    } else {
        f.cloned()
    };
    if let Some(r) = &explicit {
        grid.check_same(r.grid())?;
    }

    let cu = u.spectrum();
    let cr = explicit.as_ref().map(|r| r.spectrum());
    let zero = Complex::new(0.0, 0.0);
    let weight_exp = 2.0 * s.value() + 1.0;
    let mut next = Vec::with_capacity(cu.len());
    let mut e = StepEnergy::default();
    for (j, &lam) in grid.wavenumbers().iter().enumerate() {
        let z = -(b_mean * lam.abs().powi(3) + epsilon * lam.powi(6)) * dt;
        let damp = z.exp();
        let r = cr.as_ref().map_or(zero, |cr| cr[j]);
        let c1 = cu[j] * damp + r * (phi1(z) * dt);
        let w = (1.0 + lam.abs()).powf(weight_exp);
        let before = cu[j].norm_sqr();
        let after = c1.norm_sqr();
        let diss = (1.0 - damp * damp) * before;
        let forcing = 2.0 * dt * (cu[j] * r.conj()).re;
        e.l2_before += before;
        e.l2_after += after;
        e.l2_dissipation += diss;
        e.l2_forcing += forcing;
        e.hs_before += w * before;
        e.hs_after += w * after;
        e.hs_dissipation += w * diss;
        e.hs_forcing += w * forcing;
        next.push(c1);
    }
    let l = grid.length();
    for v in [
        &mut e.l2_before,
        &mut e.l2_after,
        &mut e.l2_dissipation,
        &mut e.l2_forcing,
        &mut e.hs_before,
        &mut e.hs_after,
        &mut e.hs_dissipation,
        &mut e.hs_forcing,
    ] {
        *v *= l;
    }
    Ok((RealField::from_spectrum(grid, next), e))
}
