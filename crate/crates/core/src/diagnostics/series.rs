use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Fewest samples accepted by [`smoothing_integral`].
pub const MIN_SMOOTHING_SAMPLES: usize = 20;

/// Column view of a trajectory plus the cumulative smoothing integral.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormSeries {
    pub t: Vec<f64>,
    pub l2: Vec<f64>,
    pub hs_half: Vec<f64>,
    pub dxs2_l2: Vec<f64>,
    /// Trapezoid-rule `int_0^t ||d^{s+2} u||^2`.
    pub smooth_cum: Vec<f64>,
    pub b_min: Vec<f64>,
    pub ledger_res: Vec<f64>,
}

impl NormSeries {
    pub const HEADER: &'static str = "t,l2,hs_half,dxs2_l2,smooth_cum,b_min,ledger_res";

    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let mut smooth_cum = Vec::with_capacity(traj.len());
        let mut acc = 0.0;
        for (i, d) in traj.dxs2_l2.iter().enumerate() {
            if i > 0 {
                let prev = traj.dxs2_l2[i - 1];
                acc += 0.5 * (traj.times[i] - traj.times[i - 1]) * (prev * prev + d * d);
            }
            smooth_cum.push(acc);
        }
        Self {
            t: traj.times.clone(),
            l2: traj.l2.clone(),
            hs_half: traj.hs_half.clone(),
            dxs2_l2: traj.dxs2_l2.clone(),
            smooth_cum,
            b_min: traj.b_min.clone(),
            ledger_res: traj.ledger_res.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn row(&self, i: usize) -> [f64; 7] {
        [
            self.t[i],
            self.l2[i],
            self.hs_half[i],
            self.dxs2_l2[i],
            self.smooth_cum[i],
            self.b_min[i],
            self.ledger_res[i],
        ]
    }
}

/// `int_0^T ||d^{s+2} u||^2 dt` and its size relative to `M0^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Smoothing {
    pub value: f64,
    /// `||u0||^2_{H^{s+1/2}}`.
    pub m0_sq: f64,
    pub ratio: f64,
    pub series: NormSeries,
}

pub fn smoothing_integral(traj: &Trajectory) -> Result<Smoothing> {
    if traj.len() < MIN_SMOOTHING_SAMPLES {
        return Err(Error::Study(format!(
            "smoothing integral needs at least {MIN_SMOOTHING_SAMPLES} samples, trajectory has {}",
            traj.len()
        )));
    }
    let series = NormSeries::from_trajectory(traj);
    let value = *series.smooth_cum.last().unwrap();
    let m0_sq = series.hs_half[0].powi(2);
    let ratio = if m0_sq > 0.0 { value / m0_sq } else { 0.0 };
    Ok(Smoothing {
        value,
        m0_sq,
        ratio,
        series,
    })
}
