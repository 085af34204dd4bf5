use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface tension `tau`, anisotropy `gamma` and viscosity `epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    tau: f64,
    gamma: f64,
    epsilon: f64,
}

impl PhysicsParams {
    pub fn new(tau: f64, gamma: f64, epsilon: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau = {tau} must be positive")));
        }
        Self::checked(tau, gamma, epsilon)
    }

    /// `tau = 0`: the Ivantsov needle is then a steady state. Not a valid
    /// configuration for time evolution.
    pub fn zero_surface_tension(gamma: f64) -> Result<Self> {
        Self::checked(0.0, gamma, 0.0)
    }

    fn checked(tau: f64, gamma: f64, epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma} outside [0, 1); beta = tau(1 - gamma) must stay positive"
            )));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be >= 0")));
        }
        Ok(Self { tau, gamma, epsilon })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Ellipticity floor `beta = tau (1 - gamma)`.
    pub fn beta(&self) -> f64 {
        self.tau * (1.0 - self.gamma)
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Self::checked(self.tau, self.gamma, epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert!(PhysicsParams::new(0.0, 0.1, 0.0).is_err());
        assert!(PhysicsParams::new(1.0, 1.0, 0.0).is_err());
        assert!(PhysicsParams::new(1.0, -0.1, 0.0).is_err());
        assert!(PhysicsParams::new(1.0, 0.5, -1.0).is_err());
        let p = PhysicsParams::new(0.5, 0.2, 0.0).unwrap();
        assert!((p.beta() - 0.4).abs() < 1e-15);
        assert_eq!(PhysicsParams::zero_surface_tension(0.3).unwrap().beta(), 0.0);
    }
}
