use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const MIN_MODES: usize = 16;
pub const MAX_MODES: usize = 1 << 20;

/// Uniform periodic grid on `[-L/2, L/2)` together with its wavenumber ladder.
///
/// Spectral data is kept in FFT storage order: index `j` carries mode number
/// `k = j` for `j <= n/2` and `k = j - n` above, so the ladder runs over
/// `k = -n/2+1 ..= n/2` with the lone Nyquist mode at `+n/2`.
pub struct SpectralGrid {
    n: usize,
    length: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    hilbert_sign: f64,
    oversampled: OnceLock<Arc<SpectralGrid>>,
}

impl SpectralGrid {
    pub fn new(n: usize, length: f64) -> Result<Arc<Self>> {
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n = {n} must be even")));
        }
        if !(MIN_MODES..=MAX_MODES).contains(&n) {
            return Err(Error::InvalidGrid(format!(
                "n = {n} outside [{MIN_MODES}, {MAX_MODES}]"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length = {length} must be positive")));
        }
        Ok(Arc::new(Self::build(n, length, 1.0)))
    }

    /// Grid whose Hilbert multiplier has the wrong sign. Only useful for
    /// mutation checks of the verification suite.
    #[doc(hidden)]
    pub fn with_flipped_hilbert(n: usize, length: f64) -> Result<Arc<Self>> {
        let g = Self::new(n, length)?;
        Ok(Arc::new(Self::build(g.n, g.length, -1.0)))
    }

    fn build(n: usize, length: f64, hilbert_sign: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let h = length / n as f64;
        let nodes = (0..n).map(|j| -0.5 * length + j as f64 * h).collect();
        let wavenumbers = (0..n)
            .map(|j| 2.0 * PI * mode_number(j, n) as f64 / length)
            .collect();
        Self {
            n,
            length,
            nodes,
            wavenumbers,
            forward,
            inverse,
            hilbert_sign,
            oversampled: OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Wavenumbers `lambda_k = 2 pi k / L` in FFT storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Mode numbers in ladder order, `-n/2+1 ..= n/2`.
    pub fn ladder(&self) -> Vec<i64> {
        let half = (self.n / 2) as i64;
        (-half + 1..=half).collect()
    }

    /// Mode number stored at FFT index `j`.
    pub fn mode(&self, j: usize) -> i64 {
        mode_number(j, self.n)
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Largest resolved wavenumber, `pi n / L`.
    pub fn lambda_max(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    pub(crate) fn hilbert_sign(&self) -> f64 {
        self.hilbert_sign
    }

    /// Twice-as-fine grid on the same interval; nonlinear operators are
    /// evaluated there and truncated back.
    pub fn oversampled(&self) -> Arc<SpectralGrid> {
        self.oversampled
            .get_or_init(|| Arc::new(Self::build(2 * self.n, self.length, self.hilbert_sign)))
            .clone()
    }

    pub fn same_as(&self, other: &SpectralGrid) -> bool {
        self.n == other.n && self.length == other.length && self.hilbert_sign == other.hilbert_sign
    }

    pub(crate) fn check_same(&self, other: &SpectralGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_n: self.n,
                left_len: self.length,
                right_n: other.n,
                right_len: other.length,
            })
        }
    }

    /// Normalised DFT, `X_j / n`, without the node phase.
    pub(crate) fn forward(&self, samples: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        let inv_n = 1.0 / self.n as f64;
        for c in &mut buf {
            *c *= inv_n;
        }
        buf
    }

    /// Inverse of [`forward`](Self::forward); returns the real part.
    pub(crate) fn inverse(&self, mut spectrum: Vec<Complex<f64>>) -> Vec<f64> {
        self.inverse.process(&mut spectrum);
        spectrum.into_iter().map(|c| c.re).collect()
    }
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

fn mode_number(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}
