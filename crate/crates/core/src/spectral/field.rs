use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustfft::num_complex::Complex;

use super::grid::SpectralGrid;
use crate::error::{Error, Result};

/// A real function sampled on a [`SpectralGrid`].
///
/// Samples are the primary representation; Fourier coefficients are derived
/// on demand.
#[derive(Clone, Debug)]
pub struct RealField {
    grid: Arc<SpectralGrid>,
    samples: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Arc<SpectralGrid>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                grid.n()
            )));
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, samples })
    }

    /// Construction from trusted arithmetic; finiteness is not re-checked.
    pub(crate) fn from_raw(grid: Arc<SpectralGrid>, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.n());
        Self { grid, samples }
    }

    pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
        Self::from_raw(grid.clone(), vec![0.0; grid.n()])
    }

    pub fn constant(grid: &Arc<SpectralGrid>, value: f64) -> Self {
        Self::from_raw(grid.clone(), vec![value; grid.n()])
    }

    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64) -> f64) -> Self {
        let samples = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::from_raw(grid.clone(), samples)
    }

    /// Build from a spectrum in FFT storage order, normalised as `X_j / n`
    /// (no node phase). The imaginary part of the synthesis is discarded.
    pub(crate) fn from_spectrum(grid: &Arc<SpectralGrid>, spectrum: Vec<Complex<f64>>) -> Self {
        let samples = grid.inverse(spectrum);
        Self::from_raw(grid.clone(), samples)
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|x| x.is_finite())
    }

    /// Normalised DFT in storage order (phase relative to node 0).
    pub(crate) fn spectrum(&self) -> Vec<Complex<f64>> {
        self.grid.forward(&self.samples)
    }

    /// Fourier coefficients `c_k` with `u(xi) = sum_k c_k exp(i lambda_k xi)`,
    /// in FFT storage order.
    pub fn coeffs(&self) -> Vec<Complex<f64>> {
        let mut c = self.spectrum();
        // nodes start at -L/2, which contributes exp(i pi k) = (-1)^k
        for (j, cj) in c.iter_mut().enumerate() {
            if self.grid.mode(j) % 2 != 0 {
                *cj = -*cj;
            }
        }
        c
    }

    pub fn from_coeffs(grid: &Arc<SpectralGrid>, coeffs: &[Complex<f64>]) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::InvalidGrid(format!(
                "{} coefficients for a grid of {} modes",
                coeffs.len(),
                grid.n()
            )));
        }
        let spectrum = coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| if grid.mode(j) % 2 != 0 { -c } else { c })
            .collect();
        let f = Self::from_spectrum(grid, spectrum);
        Self::new(grid.clone(), f.samples)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid.clone(), self.samples.iter().map(|&x| f(x)).collect())
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(self.zip_unchecked(other, f))
    }

    pub(crate) fn zip_unchecked(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> Self {
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_raw(self.grid.clone(), samples)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|x| a * x)
    }

    /// Discrete L2 distance `||self - other||` (trapezoid rule).
    pub fn l2_distance(&self, other: &RealField) -> f64 {
        let h = self.grid.spacing();
        let sq: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (sq * h).sqrt()
    }

    /// Largest pointwise deviation.
    pub fn max_distance(&self, other: &RealField) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl PartialEq for RealField {
    fn eq(&self, other: &Self) -> bool {
        self.grid.same_as(&other.grid) && self.samples == other.samples
    }
}

// Arithmetic between fields panics on mismatched grids; the fallible
// equivalents are `zip_map` and the spectral operations.
impl Add for &RealField {
    type Output = RealField;
    fn add(self, rhs: &RealField) -> RealField {
        assert!(self.grid.same_as(&rhs.grid), "grid mismatch in field addition");
        self.zip_unchecked(rhs, |a, b| a + b)
    }
}

impl Sub for &RealField {
    type Output = RealField;
    fn sub(self, rhs: &RealField) -> RealField {
        assert!(self.grid.same_as(&rhs.grid), "grid mismatch in field subtraction");
        self.zip_unchecked(rhs, |a, b| a - b)
    }
}

impl Mul for &RealField {
    type Output = RealField;
    /// Pointwise (aliased) product.
    fn mul(self, rhs: &RealField) -> RealField {
        assert!(self.grid.same_as(&rhs.grid), "grid mismatch in field product");
        self.zip_unchecked(rhs, |a, b| a * b)
    }
}

impl Mul<&RealField> for f64 {
    type Output = RealField;
    fn mul(self, rhs: &RealField) -> RealField {
        rhs.scale(self)
    }
}

impl Add<f64> for &RealField {
    type Output = RealField;
    fn add(self, rhs: f64) -> RealField {
        self.map(|x| x + rhs)
    }
}

impl Neg for &RealField {
    type Output = RealField;
    fn neg(self) -> RealField {
        self.scale(-1.0)
    }
}
