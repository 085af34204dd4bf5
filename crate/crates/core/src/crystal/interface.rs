use super::background::{Background, BackgroundKind};
use super::tower::OVERFLOW_LIMIT;
use crate::error::{Error, Result};
use crate::spectral::{antiderivative_periodic, derivative, hilbert, mean, RealField};

fn guarded_h(u: &RealField, bg: &Background) -> Result<RealField> {
    u.grid().check_same(bg.grid())?;
    let h = bg.h_i() + u;
    let value = h.max_abs();
    if !value.is_finite() || value > OVERFLOW_LIMIT {
        return Err(Error::Overflow { value, limit: OVERFLOW_LIMIT });
    }
    Ok(h)
}

/// `kappa = H[h_xi] e^{-h}` with `h = h^I + u`.
pub fn curvature(u: &RealField, bg: &Background) -> Result<RealField> {
    let h = guarded_h(u, bg)?;
    let hx = bg.h_i_xi() + &derivative(u, 1);
    Ok(hilbert(&hx).zip_unchecked(&h, |k, h| k * (-h).exp()))
}

/// Sampled interface `x_j + i y_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Integral from the left node, `mean (xi + L/2) + periodic part`.
fn integrate(f: &RealField) -> Vec<f64> {
    let m = mean(f);
    let left = f.grid().nodes()[0];
    antiderivative_periodic(f)
        .samples()
        .iter()
        .zip(f.grid().nodes())
        .map(|(p, &x)| p + m * (x - left))
        .collect()
}

/// Rebuild `z(xi)` from `z_xi = e^{h + i q}`, with `h = h^I + u` and
/// `q = q^I - H[u]`.
///
/// The base curve is integrated analytically (`xi - i xi^2/2` for the
/// needle, `xi` for the flat background) and only the perturbation
/// `e^{h^I + i q^I}(e^{u - i H u} - 1)` spectrally, so `u = 0` reproduces
/// the base curve exactly.
pub fn reconstruct_interface(u: &RealField, bg: &Background) -> Result<Curve> {
    guarded_h(u, bg)?;
    let grid = u.grid();
    let hu = hilbert(u);
    let (mut re, mut im) = (Vec::with_capacity(grid.n()), Vec::with_capacity(grid.n()));
    for j in 0..grid.n() {
        let base = bg.h_i().samples()[j].exp();
        let phase = bg.q_i().samples()[j];
        let (uj, vj) = (u.samples()[j], -hu.samples()[j]);
        let amp = uj.exp();
        let (pr, pi) = (amp * vj.cos() - 1.0, amp * vj.sin());
        let (c, s) = (phase.cos(), phase.sin());
        re.push(base * (c * pr - s * pi));
        im.push(base * (s * pr + c * pi));
    }
    let dx = integrate(&RealField::new(grid.clone(), re)?);
    let dy = integrate(&RealField::new(grid.clone(), im)?);
    let needle = bg.kind() == BackgroundKind::Ivantsov;
    let (x, y) = grid
        .nodes()
        .iter()
        .zip(dx.iter().zip(&dy))
        .map(|(&xi, (a, b))| {
            let yb = if needle { -0.5 * xi * xi } else { 0.0 };
            (xi + a, yb + b)
        })
        .unzip();
    Ok(Curve { x, y })
}
