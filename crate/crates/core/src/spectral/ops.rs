//! Fourier-multiplier operators, Sobolev norms and products.
//!
//! Every operator here is a pure function of its inputs. Odd symbols
//! (Hilbert transform, odd derivatives) annihilate the Nyquist mode, whose
//! sign is ambiguous on an even grid.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::field::RealField;
use super::grid::SpectralGrid;
use crate::error::{Error, Result};

/// Sobolev index `s >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s >= 0.0 {
            Ok(Self(s))
        } else {
            Err(Error::InvalidParameter(format!("Sobolev index {s} must be >= 0")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `s + delta`, clamped at zero.
    pub fn shifted(self, delta: f64) -> Self {
        Self((self.0 + delta).max(0.0))
    }
}

impl TryFrom<f64> for SobolevIndex {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<SobolevIndex> for f64 {
    fn from(s: SobolevIndex) -> f64 {
        s.0
    }
}

/// Apply the multiplier `symbol(j, lambda_j)` to every mode.
pub fn apply_multiplier(f: &RealField, symbol: impl Fn(usize, f64) -> Complex<f64>) -> RealField {
    let grid = f.grid();
    let mut spec = f.spectrum();
    for (j, (c, &lam)) in spec.iter_mut().zip(grid.wavenumbers()).enumerate() {
        *c *= symbol(j, lam);
    }
    RealField::from_spectrum(grid, spec)
}

/// Hilbert transform with multiplier `i sgn(lambda)`; constants and the
/// Nyquist mode are annihilated.
pub fn hilbert(f: &RealField) -> RealField {
    let grid = f.grid().clone();
    let nyq = grid.nyquist_index();
    let sign = grid.hilbert_sign();
    apply_multiplier(f, |j, lam| {
        if j == nyq || lam == 0.0 {
            Complex::new(0.0, 0.0)
        } else {
            Complex::new(0.0, sign * lam.signum())
        }
    })
}

/// `j`-th derivative, symbol `(i lambda)^j`.
pub fn derivative(f: &RealField, order: u32) -> RealField {
    if order == 0 {
        return f.clone();
    }
    let nyq = f.grid().nyquist_index();
    let odd = order % 2 == 1;
    // i^order
    let unit = match order % 4 {
        0 => Complex::new(1.0, 0.0),
        1 => Complex::new(0.0, 1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, -1.0),
    };
    apply_multiplier(f, |j, lam| {
        if odd && j == nyq {
            Complex::new(0.0, 0.0)
        } else {
            unit * lam.powi(order as i32)
        }
    })
}

/// `|D|^s`, symbol `|lambda|^s`. For `s = 1` this is `-H d/dxi` on fields
/// without Nyquist content.
pub fn frac_derivative(f: &RealField, s: f64) -> RealField {
    if s == 0.0 {
        return f.clone();
    }
    apply_multiplier(f, |_, lam| Complex::new(lam.abs().powf(s), 0.0))
}

/// `sum_k w(lambda_k) |c_k|^2` scaled by `L`.
fn weighted_energy(f: &RealField, weight: impl Fn(f64) -> f64) -> f64 {
    let grid = f.grid();
    let spec = f.spectrum();
    let sum: f64 = spec
        .iter()
        .zip(grid.wavenumbers())
        .map(|(c, &lam)| weight(lam) * c.norm_sqr())
        .sum();
    grid.length() * sum
}

/// `||f||_{H^s}^2 = L sum_k (1 + |lambda_k|)^{2s} |c_k|^2`.
pub fn sobolev_norm_sq(f: &RealField, s: SobolevIndex) -> f64 {
    let two_s = 2.0 * s.value();
    weighted_energy(f, |lam| (1.0 + lam.abs()).powf(two_s))
}

pub fn sobolev_norm(f: &RealField, s: SobolevIndex) -> f64 {
    sobolev_norm_sq(f, s).sqrt()
}

/// `||d^j f||_{L2}` computed spectrally.
pub fn derivative_l2(f: &RealField, order: u32) -> f64 {
    let d = derivative(f, order);
    weighted_energy(&d, |_| 1.0).sqrt()
}

/// `(L sum_k |lambda_k|^{2r} |c_k|^2)^{1/2}`, the `L2` norm of `|D|^r f`.
pub fn homogeneous_norm(f: &RealField, r: f64) -> f64 {
    weighted_energy(f, |lam| lam.abs().powf(2.0 * r)).sqrt()
}

/// Weighted inner product `L sum_k (1+|lambda_k|)^{2s} Re(c_k conj d_k)`.
pub fn sobolev_inner(f: &RealField, g: &RealField, s: SobolevIndex) -> Result<f64> {
    f.grid().check_same(g.grid())?;
    let grid = f.grid();
    let a = f.spectrum();
    let b = g.spectrum();
    let two_s = 2.0 * s.value();
    let sum: f64 = a
        .iter()
        .zip(&b)
        .zip(grid.wavenumbers())
        .map(|((x, y), &lam)| (1.0 + lam.abs()).powf(two_s) * (x * y.conj()).re)
        .sum();
    Ok(grid.length() * sum)
}

/// Trapezoid-rule integral of `f g` over one period.
pub fn inner(f: &RealField, g: &RealField) -> Result<f64> {
    f.grid().check_same(g.grid())?;
    let s: f64 = f.samples().iter().zip(g.samples()).map(|(a, b)| a * b).sum();
    Ok(s * f.grid().spacing())
}

/// Zero mode `c_0`.
pub fn mean(f: &RealField) -> f64 {
    f.samples().iter().sum::<f64>() / f.samples().len() as f64
}

/// Band-limited interpolation or truncation onto `target` (same length).
/// The Nyquist mode is dropped in both directions.
pub fn resample(f: &RealField, target: &Arc<SpectralGrid>) -> Result<RealField> {
    let src = f.grid();
    if src.length() != target.length() {
        return Err(Error::InvalidGrid(format!(
            "cannot resample between lengths {} and {}",
            src.length(),
            target.length()
        )));
    }
    if src.same_as(target) {
        return Ok(f.clone());
    }
    let (n, m) = (src.n(), target.n());
    let keep = n.min(m) / 2;
    let spec = f.spectrum();
    let mut out = vec![Complex::new(0.0, 0.0); m];
    out[0] = spec[0];
    for k in 1..keep {
        out[k] = spec[k];
        out[m - k] = spec[n - k];
    }
    Ok(RealField::from_spectrum(target, out))
}

/// Product of two fields. With `dealias` both factors are zero-padded by
/// 3/2 before multiplication and the result is truncated back, so no
/// quadratic aliasing reaches the retained modes.
pub fn product(f: &RealField, g: &RealField, dealias: bool) -> Result<RealField> {
    f.grid().check_same(g.grid())?;
    if !dealias {
        return Ok(f.zip_unchecked(g, |a, b| a * b));
    }
    let grid = f.grid();
    let padded = SpectralGrid::new(3 * grid.n() / 2, grid.length())?;
    let padded = if grid.hilbert_sign() < 0.0 {
        SpectralGrid::with_flipped_hilbert(padded.n(), padded.length())?
    } else {
        padded
    };
    let fp = resample(f, &padded)?;
    let gp = resample(g, &padded)?;
    resample(&fp.zip_unchecked(&gp, |a, b| a * b), grid)
}

/// `[H, f] g = H[f g] - f H[g]`, with pointwise products.
pub fn commutator_h(f: &RealField, g: &RealField) -> Result<RealField> {
    f.grid().check_same(g.grid())?;
    let fg = f.zip_unchecked(g, |a, b| a * b);
    let hg = hilbert(g);
    Ok(&hilbert(&fg) - &(f * &hg))
}

/// Periodic antiderivative of `f - mean(f)`, fixed to vanish at the left node.
pub fn antiderivative_periodic(f: &RealField) -> RealField {
    let nyq = f.grid().nyquist_index();
    let p = apply_multiplier(f, |j, lam| {
        if j == nyq || lam == 0.0 {
            Complex::new(0.0, 0.0)
        } else {
            Complex::new(0.0, -1.0 / lam)
        }
    });
    let p0 = p.samples()[0];
    p.map(|x| x - p0)
}
