//! Dispersive-dissipative linear solvers and their energy ledger.

mod solve;
mod step;

pub use solve::{
    energy_ledger_check, solve_linear_ivp, step_count, Coefficient, EnergyLedger, Forcing,
    LedgerReport, LedgerRow, LinearProblem, BLOW_UP_FACTOR,
};
pub(crate) use solve::blow_up_check;
pub use step::{heat6_step, linear_step, linstep_constant_b, phi1, StepEnergy, STABILITY_LIMIT};
