//! Hilbert-transform identities on mean-zero periodic fields, and a
//! seeded generator of band-limited test data.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use super::field::RealField;
use super::grid::SpectralGrid;
use super::ops::{hilbert, inner, product};
use crate::error::{Error, Result};

/// Random mean-zero field with modes `1..=kmax`, scaled to `max|f| = amplitude`.
pub fn random_bandlimited<R: Rng + ?Sized>(
    grid: &Arc<SpectralGrid>,
    kmax: usize,
    amplitude: f64,
    rng: &mut R,
) -> Result<RealField> {
    if kmax == 0 || kmax >= grid.n() / 2 {
        return Err(Error::InvalidParameter(format!(
            "kmax = {kmax} must lie in [1, {}]",
            grid.n() / 2 - 1
        )));
    }
    let coeffs: Vec<(f64, f64)> = (0..kmax)
        .map(|_| (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
        .collect();
    let w = 2.0 * PI / grid.length();
    let f = RealField::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, (a, b))| {
                let k = (j + 1) as f64 * w;
                a * (k * x).cos() + b * (k * x).sin()
            })
            .sum()
    });
    let peak = f.max_abs();
    Ok(if peak > 0.0 { f.scale(amplitude / peak) } else { f })
}

/// Relative residuals of the isometry, skew-adjointness, involution and
/// product (tripling) identities of `H` for a pair of fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HilbertResiduals {
    /// `int H[f] H[g] = int f g`.
    pub isometry: f64,
    /// `int g H[f] = -int f H[g]`.
    pub skew: f64,
    /// `H[H[f]] = -f`.
    pub involution: f64,
    /// `H[fg] = H[H[f] H[g]] + g H[f] + f H[g]`.
    pub tripling: f64,
}

impl HilbertResiduals {
    pub fn max(&self) -> f64 {
        self.isometry.max(self.skew).max(self.involution).max(self.tripling)
    }
}

/// Exact for mean-zero fields band-limited below `n/4`, where all pointwise
/// products are alias-free.
pub fn hilbert_residuals(f: &RealField, g: &RealField) -> Result<HilbertResiduals> {
    let (hf, hg) = (hilbert(f), hilbert(g));
    let scale = (inner(f, f)? * inner(g, g)?).sqrt().max(f64::MIN_POSITIVE);
    let isometry = (inner(&hf, &hg)? - inner(f, g)?).abs() / scale;
    let skew = (inner(g, &hf)? + inner(f, &hg)?).abs() / scale;
    let involution = (&hilbert(&hf) + f).max_abs() / f.max_abs().max(f64::MIN_POSITIVE);
    let lhs = hilbert(&product(f, g, false)?);
    let rhs = &(&hilbert(&product(&hf, &hg, false)?) + &product(g, &hf, false)?) + &product(f, &hg, false)?;
    let tripling = lhs.max_distance(&rhs) / (f.max_abs() * g.max_abs()).max(f64::MIN_POSITIVE);
    Ok(HilbertResiduals {
        isometry,
        skew,
        involution,
        tripling,
    })
}
