use serde::Serialize;

use crate::spectral::{homogeneous_norm, sobolev_norm, RealField, SobolevIndex};

/// Where and why a run stopped early.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Abort {
    pub t: f64,
    pub reason: String,
}

/// Time-indexed snapshots with per-time norm columns.
#[derive(Clone, Debug)]
pub struct Trajectory {
    s: SobolevIndex,
    pub times: Vec<f64>,
    pub fields: Vec<RealField>,
    /// `||u||_{L2}`
    pub l2: Vec<f64>,
    /// `||u||_{H^{s+1/2}}`
    pub hs_half: Vec<f64>,
    /// `||d^{s+2} u||_{L2}`
    pub dxs2_l2: Vec<f64>,
    /// Minimum of the dispersive coefficient in force at that time.
    pub b_min: Vec<f64>,
    pub picard_iters: Vec<usize>,
    /// Relative residual of the discrete energy identity on the last step.
    pub ledger_res: Vec<f64>,
    pub abort: Option<Abort>,
}

impl Trajectory {
    pub fn new(s: SobolevIndex) -> Self {
        Self {
            s,
            times: Vec::new(),
            fields: Vec::new(),
            l2: Vec::new(),
            hs_half: Vec::new(),
            dxs2_l2: Vec::new(),
            b_min: Vec::new(),
            picard_iters: Vec::new(),
            ledger_res: Vec::new(),
            abort: None,
        }
    }

    pub fn sobolev_index(&self) -> SobolevIndex {
        self.s
    }

    pub fn push(&mut self, t: f64, u: RealField, b_min: f64, picard_iters: usize, ledger_res: f64) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        let s = self.s.value();
        self.times.push(t);
        self.l2.push(sobolev_norm(&u, SobolevIndex::new(0.0).unwrap()));
        self.hs_half.push(sobolev_norm(&u, self.s.shifted(0.5)));
        self.dxs2_l2.push(homogeneous_norm(&u, s + 2.0));
        self.b_min.push(b_min);
        self.picard_iters.push(picard_iters);
        self.ledger_res.push(ledger_res);
        self.fields.push(u);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&RealField> {
        self.fields.last()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn completed(&self) -> bool {
        self.abort.is_none()
    }
}
