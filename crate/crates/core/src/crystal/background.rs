use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{derivative, resample, RealField, SpectralGrid};

/// Outer edge of the window transition, as a fraction of `L/2`.
pub const WINDOW_OUTER_FRACTION: f64 = 0.9;
/// Default inner (flat) part of the window.
pub const DEFAULT_INNER_FRACTION: f64 = 0.6;

const WINDOW_STEEPNESS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackgroundKind {
    Flat,
    Ivantsov,
}

impl std::str::FromStr for BackgroundKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "flat" => Ok(Self::Flat),
            "ivantsov" => Ok(Self::Ivantsov),
            other => Err(format!("unknown background '{other}' (expected flat or ivantsov)")),
        }
    }
}

impl std::fmt::Display for BackgroundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Flat => "flat",
            Self::Ivantsov => "ivantsov",
        })
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Profiles {
    pub h_i: RealField,
    pub q_i: RealField,
    pub h_i_xi: RealField,
    pub q_i_xi: RealField,
}

impl Profiles {
    fn resampled(&self, grid: &Arc<SpectralGrid>) -> Result<Self> {
        Ok(Self {
            h_i: resample(&self.h_i, grid)?,
            q_i: resample(&self.q_i, grid)?,
            h_i_xi: resample(&self.h_i_xi, grid)?,
            q_i_xi: resample(&self.q_i_xi, grid)?,
        })
    }
}

/// Log-derivative profiles `h^I`, `q^I` of the needle the perturbation
/// rides on, windowed so they live on the periodic grid.
#[derive(Clone, Debug)]
pub struct Background {
    kind: BackgroundKind,
    inner_fraction: f64,
    window: RealField,
    coarse: Profiles,
    fine: Profiles,
}

impl Background {
    pub fn flat(grid: &Arc<SpectralGrid>) -> Self {
        let z = RealField::zeros(grid);
        let zf = RealField::zeros(&grid.oversampled());
        let zeros = |f: &RealField| Profiles {
            h_i: f.clone(),
            q_i: f.clone(),
            h_i_xi: f.clone(),
            q_i_xi: f.clone(),
        };
        Self {
            kind: BackgroundKind::Flat,
            inner_fraction: 1.0,
            window: RealField::constant(grid, 1.0),
            coarse: zeros(&z),
            fine: zeros(&zf),
        }
    }

    /// Windowed Ivantsov profiles `h^I = ln(1 + xi^2)/2`, `q^I = -arctan xi`.
    pub fn ivantsov(grid: &Arc<SpectralGrid>, inner_fraction: f64) -> Result<Self> {
        if !(inner_fraction > 0.0 && inner_fraction <= 0.8) {
            return Err(Error::InvalidParameter(format!(
                "window inner fraction {inner_fraction} outside (0, 0.8]"
            )));
        }
        let half = 0.5 * grid.length();
        let (a, b) = (inner_fraction * half, WINDOW_OUTER_FRACTION * half);
        let window = RealField::from_fn(grid, |x| 1.0 - smooth_step((x.abs() - a) / (b - a)));
        let h_i = RealField::from_fn(grid, |x| 0.5 * x.mul_add(x, 1.0).ln()).zip_map(&window, |h, w| h * w)?;
        let q_i = RealField::from_fn(grid, |x| -x.atan()).zip_map(&window, |q, w| q * w)?;
        let coarse = Profiles {
            h_i_xi: derivative(&h_i, 1),
            q_i_xi: derivative(&q_i, 1),
            h_i,
            q_i,
        };
        let fine = coarse.resampled(&grid.oversampled())?;
        Ok(Self {
            kind: BackgroundKind::Ivantsov,
            inner_fraction,
            window,
            coarse,
            fine,
        })
    }

    pub fn from_kind(grid: &Arc<SpectralGrid>, kind: BackgroundKind, inner_fraction: f64) -> Result<Self> {
        match kind {
            BackgroundKind::Flat => Ok(Self::flat(grid)),
            BackgroundKind::Ivantsov => Self::ivantsov(grid, inner_fraction),
        }
    }

    pub fn kind(&self) -> BackgroundKind {
        self.kind
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.window.grid()
    }

    pub fn inner_fraction(&self) -> f64 {
        self.inner_fraction
    }

    pub fn window(&self) -> &RealField {
        &self.window
    }

    pub fn h_i(&self) -> &RealField {
        &self.coarse.h_i
    }

    pub fn q_i(&self) -> &RealField {
        &self.coarse.q_i
    }

    pub fn h_i_xi(&self) -> &RealField {
        &self.coarse.h_i_xi
    }

    pub fn q_i_xi(&self) -> &RealField {
        &self.coarse.q_i_xi
    }

    /// Half-width of the region where the window is identically one.
    pub fn inner_half_width(&self) -> f64 {
        0.5 * self.inner_fraction * self.grid().length()
    }

    pub(crate) fn fine(&self) -> &Profiles {
        &self.fine
    }
}

/// `C^infinity` step from 0 (x <= 0) to 1 (x >= 1).
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let y = 2.0 * x - 1.0;
        0.5 * (1.0 + libm::erf(WINDOW_STEEPNESS * y / (1.0 - y * y).sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, LN_2};

    fn at(f: &RealField, x: f64) -> f64 {
        let j = f.grid().nodes().iter().position(|&y| (y - x).abs() < 1e-12).unwrap();
        f.samples()[j]
    }

    #[test]
    fn flat_is_zero() {
        let g = SpectralGrid::new(64, 10.0).unwrap();
        let bg = Background::flat(&g);
        for f in [bg.h_i(), bg.q_i(), bg.h_i_xi(), bg.q_i_xi()] {
            assert_eq!(f.max_abs(), 0.0);
        }
        assert_eq!(bg.window().min(), 1.0);
        assert_eq!(derivative(bg.h_i(), 1).max_abs(), 0.0);
    }

    #[test]
    fn ivantsov_values() {
        let g = SpectralGrid::new(256, 40.0).unwrap();
        let bg = Background::ivantsov(&g, 0.6).unwrap();
        assert_eq!(at(bg.h_i(), 0.0), 0.0);
        assert_eq!(at(bg.q_i(), 0.0), 0.0);
        assert!((at(bg.h_i(), 1.25) - 0.5 * (1.0 + 1.5625f64).ln()).abs() < 1e-14);
        // xi = 1 is not a node at (256, 40)
        let g = SpectralGrid::new(512, 64.0).unwrap();
        let bg = Background::ivantsov(&g, 0.6).unwrap();
        assert!((at(bg.h_i(), 1.0) - 0.5 * LN_2).abs() < 1e-14);
        assert!((at(bg.q_i(), 1.0) + FRAC_PI_4).abs() < 1e-14);
        assert!((at(bg.h_i_xi(), 1.0) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn window_shape() {
        let g = SpectralGrid::new(512, 40.0).unwrap();
        let bg = Background::ivantsov(&g, 0.6).unwrap();
        let w = bg.window();
        let mut prev = f64::INFINITY;
        for (&x, &v) in g.nodes().iter().zip(w.samples()) {
            if x.abs() <= 12.0 {
                assert_eq!(v, 1.0);
            }
            if x.abs() >= 18.0 {
                assert_eq!(v, 0.0);
            }
            if x >= 0.0 {
                assert!(v <= prev);
                prev = v;
            }
        }
        for (&x, &h) in g.nodes().iter().zip(bg.h_i().samples()) {
            if x.abs() <= 12.0 {
                assert!((h - 0.5 * (1.0 + x * x).ln()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_wide_window() {
        let g = SpectralGrid::new(64, 10.0).unwrap();
        assert!(Background::ivantsov(&g, 0.85).is_err());
        assert!(Background::ivantsov(&g, 0.0).is_err());
    }
}
