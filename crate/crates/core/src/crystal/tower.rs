//! The operator tower `Q1, B, Q2, Q3, Q, Q4, Q5, N`.
//!
//! `Q1` and `B` are nodal; every composite level is evaluated on the
//! twice-oversampled grid and truncated back, which keeps the aliasing of the
//! nested exponentials below roundoff for band-limited data.

use std::sync::Arc;

use super::background::Background;
use super::params::PhysicsParams;
use crate::error::{Error, Result};
use crate::spectral::{commutator_h, derivative, hilbert, resample, RealField, SpectralGrid};

/// Exponentiation guard on `max |h^I + u|`.
pub const OVERFLOW_LIMIT: f64 = 50.0;

/// Every level of the decomposition at one state `u`, on the grid of `u`.
///
/// `q1` and `b` are nodal values; the composite levels are the truncation
/// of their oversampled evaluation.
#[derive(Clone, Debug)]
pub struct Tower {
    pub q1: RealField,
    pub b: RealField,
    pub q2: RealField,
    pub q3: RealField,
    /// `-B u_xixi + Q2 + Q3`.
    pub q: RealField,
    /// `Q` evaluated in the undecomposed form.
    pub q_direct: RealField,
    pub q4: RealField,
    pub q5: RealField,
    pub n: RealField,
    /// `B d^3 u`.
    pub b_d3u: RealField,
    /// `B H[d^3 u]`.
    pub b_hd3u: RealField,
    /// `min B`.
    pub beta_eff: f64,
}

impl Tower {
    /// Full right-hand side `-B H[d^3 u] + N`.
    pub fn rhs(&self) -> RealField {
        &self.n - &self.b_hd3u
    }
}

struct Lifted {
    coarse: Arc<SpectralGrid>,
    u: RealField,
    hu: RealField,
    h: RealField,
}

fn lift(u: &RealField, bg: &Background) -> Result<Lifted> {
    u.grid().check_same(bg.grid())?;
    let coarse = u.grid().clone();
    let fine = coarse.oversampled();
    let uf = resample(u, &fine)?;
    let h = &bg.fine().h_i + &uf;
    guard(&h)?;
    Ok(Lifted { hu: hilbert(&uf), u: uf, h, coarse })
}

fn guard(h: &RealField) -> Result<()> {
    let value = h.max_abs();
    if !value.is_finite() || value > OVERFLOW_LIMIT {
        return Err(Error::Overflow { value, limit: OVERFLOW_LIMIT });
    }
    Ok(())
}

fn anisotropy(l: &Lifted, bg: &Background, p: &PhysicsParams) -> RealField {
    let gamma = p.gamma();
    bg.fine().q_i.zip_unchecked(&l.hu, |q, hu| 1.0 - gamma * (4.0 * q - 4.0 * hu).cos())
}

fn down(f: &RealField, coarse: &Arc<SpectralGrid>) -> RealField {
    resample(f, coarse).expect("oversampled grid shares the domain length")
}

/// `(1 - gamma cos(4 q^I - 4 H u))` and `h^I + u` at the nodes of `u`.
fn pointwise(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<(RealField, RealField)> {
    u.grid().check_same(bg.grid())?;
    let h = bg.h_i() + u;
    guard(&h)?;
    let gamma = p.gamma();
    let a = bg.q_i().zip_unchecked(&hilbert(u), |q, hu| 1.0 - gamma * (4.0 * q - 4.0 * hu).cos());
    Ok((a, h))
}

/// `Q1 = (1 - gamma cos(4 q^I - 4 H u)) e^{-(h^I + u)}`.
pub fn q1(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<RealField> {
    let (a, h) = pointwise(u, bg, p)?;
    Ok(a.zip_unchecked(&h, |a, h| a * (-h).exp()))
}

/// `B = tau (1 - gamma cos(4 q^I - 4 H u)) e^{-3(h^I + u)}` and its minimum.
pub fn big_b(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<(RealField, f64)> {
    let (a, h) = pointwise(u, bg, p)?;
    let tau = p.tau();
    let b = a.zip_unchecked(&h, |a, h| tau * a * (-3.0 * h).exp());
    let beta_eff = b.min();
    Ok((b, beta_eff))
}

/// Evaluate the whole tower at `u`.
pub fn evaluate(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<Tower> {
    let l = lift(u, bg)?;
    let prof = bg.fine();
    let tau = p.tau();
    let a = anisotropy(&l, bg, p);
    let q1 = a.zip_unchecked(&l.h, |a, h| a * (-h).exp());
    let b = a.zip_unchecked(&l.h, |a, h| tau * a * (-3.0 * h).exp());
    let e = l.h.map(|h| (-2.0 * h).exp());

    let ux = derivative(&l.u, 1);
    let uxx = derivative(&l.u, 2);
    let u3 = derivative(&l.u, 3);
    let hx = &prof.h_i_xi + &ux;
    let h_hx = hilbert(&hx);

    let t1 = hilbert(&(&q1 * &hilbert(&derivative(&prof.h_i_xi, 1))));
    let t2 = hilbert(&(&derivative(&q1, 1) * &h_hx));
    let q2 = e.zip_unchecked(&(&t1 + &t2), |e, t| e * (1.0 + tau * t));
    let q3 = tau * &(&e * &commutator_h(&q1, &hilbert(&uxx))?);
    let q = &(&q2 + &q3) - &(&b * &uxx);

    let flux = derivative(&hilbert(&(&q1 * &h_hx)), 1);
    let q_direct = e.zip_unchecked(&flux, |e, f| e * (1.0 + tau * f));

    let q4 = &derivative(&(&q2 + &q3), 1) - &(&derivative(&b, 1) * &uxx);
    let q5 = &hilbert(&q4) - &commutator_h(&b, &u3)?;

    let qx = &prof.q_i_xi - &derivative(&l.hu, 1);
    let n = &(&(&hx * &hilbert(&q)) - &(&qx * &q)) + &q5;

    let b_d3u = &b * &u3;
    let b_hd3u = &b * &hilbert(&u3);

    let c = &l.coarse;
    let (q1_c, (b_c, beta_eff)) = (self::q1(u, bg, p)?, big_b(u, bg, p)?);
    Ok(Tower {
        q1: q1_c,
        b: b_c,
        q2: down(&q2, c),
        q3: down(&q3, c),
        q: down(&q, c),
        q_direct: down(&q_direct, c),
        q4: down(&q4, c),
        q5: down(&q5, c),
        n: down(&n, c),
        b_d3u: down(&b_d3u, c),
        b_hd3u: down(&b_hd3u, c),
        beta_eff,
    })
}

pub fn q2(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<RealField> {
    Ok(evaluate(u, bg, p)?.q2)
}

pub fn q3(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<RealField> {
    Ok(evaluate(u, bg, p)?.q3)
}

pub fn q_direct(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<RealField> {
    Ok(evaluate(u, bg, p)?.q_direct)
}

pub fn q_decomposed(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<RealField> {
    Ok(evaluate(u, bg, p)?.q)
}

pub fn q4(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<RealField> {
    Ok(evaluate(u, bg, p)?.q4)
}

pub fn q5(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<RealField> {
    Ok(evaluate(u, bg, p)?.q5)
}

pub fn rhs_n(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<RealField> {
    Ok(evaluate(u, bg, p)?.n)
}

/// `u_t = -B H[d^3 u] + N[u]`.
pub fn rhs(u: &RealField, bg: &Background, p: &PhysicsParams) -> Result<RealField> {
    Ok(evaluate(u, bg, p)?.rhs())
}

/// Residuals of the derivative and Hilbert identities for `Q`, each
/// normalised by the largest term involved.
#[derive(Clone, Copy, Debug)]
pub struct IdentityResiduals {
    pub route: f64,
    pub derivative: f64,
    pub hilbert: f64,
}

pub fn identity_residuals(t: &Tower) -> IdentityResiduals {
    let dq = derivative(&t.q, 1);
    let hdq = hilbert(&dq);
    let rel = |terms: &[&RealField], res: RealField| {
        let z = RealField::zeros(res.grid());
        let scale = terms.iter().map(|f| f.l2_distance(&z)).fold(0.0, f64::max);
        if scale == 0.0 {
            res.l2_distance(&z)
        } else {
            res.l2_distance(&z) / scale
        }
    };
    let route = rel(&[&t.q_direct], &t.q_direct - &t.q);
    let d = rel(&[&dq, &t.b_d3u, &t.q4], &(&dq + &t.b_d3u) - &t.q4);
    let h = rel(&[&hdq, &t.b_hd3u, &t.q5], &(&hdq + &t.b_hd3u) - &t.q5);
    IdentityResiduals {
        route,
        derivative: d,
        hilbert: h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{frac_derivative, sobolev_norm, SobolevIndex};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params(tau: f64, gamma: f64) -> PhysicsParams {
        PhysicsParams::new(tau, gamma, 0.0).unwrap()
    }

    fn random_field(g: &Arc<SpectralGrid>, kmax: usize, seed: u64) -> RealField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<(f64, f64)> = (0..kmax).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let l = g.length();
        let f = RealField::from_fn(g, |x| {
            modes
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let w = 2.0 * PI * (k + 1) as f64 * x / l;
                    a * w.cos() + b * w.sin()
                })
                .sum()
        });
        let norm = sobolev_norm(&f, SobolevIndex::new(5.0).unwrap());
        f.scale(1.0 / norm)
    }

    #[test]
    fn flat_zero_state() {
        let g = SpectralGrid::new(64, 2.0 * PI).unwrap();
        let bg = Background::flat(&g);
        let u = RealField::zeros(&g);
        let p = params(0.5, 0.2);
        let t = evaluate(&u, &bg, &p).unwrap();
        assert!(t.q1.max_distance(&RealField::constant(&g, 0.8)) < 1e-14);
        assert!(t.b.max_distance(&RealField::constant(&g, 0.4)) < 1e-14);
        assert!((t.beta_eff - 0.4).abs() < 1e-14);
        for f in [&t.q2, &t.q, &t.q_direct] {
            assert!(f.max_distance(&RealField::constant(&g, 1.0)) < 1e-14);
        }
        for f in [&t.q3, &t.q4, &t.q5, &t.n] {
            assert!(f.max_abs() < 1e-14);
        }
        assert!(t.rhs().max_abs() < 1e-14);
        let iso = evaluate(&u, &bg, &params(0.5, 0.0)).unwrap();
        assert!(iso.q1.max_distance(&RealField::constant(&g, 1.0)) < 1e-14);
        assert!(iso.b.max_distance(&RealField::constant(&g, 0.5)) < 1e-14);
    }

    #[test]
    fn ivantsov_zero_state_values() {
        let g = SpectralGrid::new(256, 64.0).unwrap();
        let bg = Background::ivantsov(&g, 0.6).unwrap();
        let u = RealField::zeros(&g);
        let j = g.nodes().iter().position(|&x| x == 1.0).unwrap();
        for gamma in [0.0, 0.3] {
            let p = params(1.0, gamma);
            let a = q1(&u, &bg, &p).unwrap();
            assert!((a.samples()[j] - (1.0 + gamma) / 2f64.sqrt()).abs() < 1e-10);
            let (b, _) = big_b(&u, &bg, &p).unwrap();
            assert!((b.samples()[j] - (1.0 + gamma) * 2f64.powf(-1.5)).abs() < 1e-10);
            let t = evaluate(&u, &bg, &p).unwrap();
            assert!(t.q.max_distance(&t.q2) < 1e-13);
            assert!(t.q3.max_abs() < 1e-13);
            assert!(t.q4.max_distance(&derivative(&t.q2, 1)) < 1e-12);
        }
    }

    #[test]
    fn zero_tension_q_is_exp() {
        let g = SpectralGrid::new(256, 40.0).unwrap();
        let bg = Background::ivantsov(&g, 0.6).unwrap();
        let u = RealField::zeros(&g);
        let p = PhysicsParams::zero_surface_tension(0.0).unwrap();
        let q = q_direct(&u, &bg, &p).unwrap();
        let want = bg.h_i().map(|h| (-2.0 * h).exp());
        assert!(q.max_distance(&want) < 1e-8);
        for (&x, &v) in g.nodes().iter().zip(q.samples()) {
            if x.abs() <= 12.0 {
                assert!((v - 1.0 / (1.0 + x * x)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gamma_zero_reduction() {
        let g = SpectralGrid::new(128, 20.0).unwrap();
        let bg = Background::ivantsov(&g, 0.6).unwrap();
        let u = random_field(&g, 6, 3).scale(0.5);
        let p = params(0.7, 0.0);
        let a = q1(&u, &bg, &p).unwrap();
        let (b, _) = big_b(&u, &bg, &p).unwrap();
        let h = bg.h_i() + &u;
        assert!(a.max_distance(&h.map(|h| (-h).exp())) < 1e-10);
        assert!(b.max_distance(&h.map(|h| 0.7 * (-3.0 * h).exp())) < 1e-10);
    }

    #[test]
    fn q2_flat_collapse() {
        let g = SpectralGrid::new(128, 2.0 * PI).unwrap();
        let bg = Background::flat(&g);
        let u = random_field(&g, 5, 11);
        let p = params(0.8, 0.25);
        let t = evaluate(&u, &bg, &p).unwrap();
        let fine = g.oversampled();
        let uf = resample(&u, &fine).unwrap();
        let q1f = resample(&t.q1, &fine).unwrap();
        let inner = hilbert(&(&derivative(&q1f, 1) * &hilbert(&derivative(&uf, 1))));
        let want = uf.zip_unchecked(&inner, |u, i| (-2.0 * u).exp() * (1.0 + 0.8 * i));
        assert!(t.q2.max_distance(&resample(&want, &g).unwrap()) < 1e-12);
    }

    #[test]
    fn q3_single_mode_isotropic() {
        let g = SpectralGrid::new(128, 2.0 * PI).unwrap();
        let bg = Background::flat(&g);
        let u = RealField::from_fn(&g, |x| 0.1 * (2.0 * x).sin());
        let p = params(0.6, 0.0);
        let t = evaluate(&u, &bg, &p).unwrap();
        let eu = u.map(|v| (-v).exp());
        let c = commutator_h(&eu, &hilbert(&derivative(&u, 2))).unwrap();
        let want = u.zip_unchecked(&c, |v, c| 0.6 * (-2.0 * v).exp() * c);
        assert!(t.q3.max_distance(&want) < 1e-10);
    }

    #[test]
    fn identities_on_random_fields() {
        let g = SpectralGrid::new(256, 40.0).unwrap();
        let p = params(0.7, 0.3);
        for bg in [Background::flat(&g), Background::ivantsov(&g, 0.6).unwrap()] {
            for seed in 0..3 {
                let u = random_field(&g, 16, seed);
                let r = identity_residuals(&evaluate(&u, &bg, &p).unwrap());
                assert!(r.route < 1e-9, "{r:?}");
                assert!(r.derivative < 1e-9, "{r:?}");
                assert!(r.hilbert < 1e-9, "{r:?}");
            }
        }
    }

    #[test]
    fn linearisation_about_flat_zero() {
        // N ~ |D| u for small u, so u_t ~ (|lambda| - beta |lambda|^3) u
        let g = SpectralGrid::new(64, 2.0 * PI).unwrap();
        let bg = Background::flat(&g);
        let p = params(1.0, 0.0);
        let dir = RealField::from_fn(&g, |x| (3.0 * x).sin());
        let n1 = rhs_n(&dir.scale(1e-4), &bg, &p).unwrap();
        let n2 = rhs_n(&dir.scale(5e-5), &bg, &p).unwrap();
        let lin = frac_derivative(&dir, 1.0);
        let e1 = n1.scale(1e4).max_distance(&lin);
        let e2 = n2.scale(2e4).max_distance(&lin);
        assert!(e1 < 1e-2 && e2 < 0.6 * e1, "{e1} {e2}");
    }

    #[test]
    fn overflow_guard() {
        let g = SpectralGrid::new(32, 2.0 * PI).unwrap();
        let bg = Background::flat(&g);
        let u = RealField::constant(&g, 60.0);
        assert!(matches!(
            evaluate(&u, &bg, &params(1.0, 0.0)),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn ellipticity_floor() {
        let g = SpectralGrid::new(128, 2.0 * PI).unwrap();
        let bg = Background::flat(&g);
        let p = params(0.9, 0.4);
        for seed in 0..4 {
            let u = random_field(&g, 8, seed).scale(50.0);
            let m = u.max_abs();
            let (_, beta) = big_b(&u, &bg, &p).unwrap();
            assert!(beta >= p.beta() * (-3.0 * m).exp() * (1.0 - 1e-9));
        }
    }
}
