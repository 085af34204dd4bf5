use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::evolution::EvolveConfig;

/// Acceptance rule a measured value is held against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum Threshold {
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
    Between { low: f64, high: f64 },
}

impl Threshold {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Self::AtMost { limit } => v <= limit,
            Self::AtLeast { limit } => v >= limit,
            Self::Between { low, high } => (low..=high).contains(&v),
        }
    }
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Self::AtMost { limit } => write!(f, "<= {limit:e}"),
            Self::AtLeast { limit } => write!(f, ">= {limit:e}"),
            Self::Between { low, high } => write!(f, "in [{low}, {high}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: Threshold,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, threshold: Threshold) -> Self {
        Self {
            name: name.into(),
            value,
            pass: threshold.admits(value),
            threshold,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, Threshold::AtMost { limit })
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, Threshold::AtLeast { limit })
    }

    pub fn between(name: impl Into<String>, value: f64, low: f64, high: f64) -> Self {
        Self::new(name, value, Threshold::Between { low, high })
    }

    /// A yes/no condition, recorded as `1 >= 1` or `0 >= 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
}

/// Grid, parameters and scheme a study ran with.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Environment {
    pub n: usize,
    pub length: f64,
    pub tau: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub s: f64,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: String,
    pub background: String,
    pub seed: Option<u64>,
}

impl Environment {
    pub fn from_config(cfg: &EvolveConfig, seed: Option<u64>) -> Self {
        let g = cfg.bg.grid();
        Self {
            n: g.n(),
            length: g.length(),
            tau: cfg.params.tau(),
            gamma: cfg.params.gamma(),
            epsilon: cfg.params.epsilon(),
            beta: cfg.params.beta(),
            s: cfg.s.value(),
            dt: cfg.dt,
            t_final: cfg.t_final,
            scheme: cfg.scheme.to_string(),
            background: cfg.bg.kind().to_string(),
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyReport {
    pub kind: String,
    /// SHA-256 of the textual description of the inputs.
    pub inputs_digest: String,
    pub measurements: Vec<Measurement>,
    pub checks: Vec<Check>,
    pub environment: Option<Environment>,
}

impl StudyReport {
    pub fn new(kind: impl Into<String>, inputs: &str, environment: Option<Environment>) -> Self {
        let digest = Sha256::digest(inputs.as_bytes());
        Self {
            kind: kind.into(),
            inputs_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
            measurements: Vec::new(),
            checks: Vec::new(),
            environment,
        }
    }

    pub fn measure(&mut self, name: impl Into<String>, value: f64) {
        self.measurements.push(Measurement {
            name: name.into(),
            value,
        });
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn measurement(&self, name: &str) -> Option<f64> {
        self.measurements.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for StudyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{} [{}]", self.kind, &self.inputs_digest[..12])?;
        for m in &self.measurements {
            writeln!(f, "  {:<36} {:.6e}", m.name, m.value)?;
        }
        for c in &self.checks {
            let tag = if c.pass { "ok  " } else { "FAIL" };
            writeln!(f, "  {tag} {:<31} {:.6e} {}", c.name, c.value, c.threshold)?;
        }
        write!(f, "  overall: {}", if self.passed() { "pass" } else { "fail" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert!(Check::at_most("a", 0.5, 0.5).pass);
        assert!(!Check::at_most("a", 0.6, 0.5).pass);
        assert!(Check::between("b", 1.0, 0.8, 1.25).pass);
        assert!(!Check::between("b", 1.3, 0.8, 1.25).pass);
        assert!(!Check::at_most("nan", f64::NAN, 1.0).pass);
        assert!(!Check::holds("c", false).pass);
    }

    #[test]
    fn report_digest_is_stable() {
        let a = StudyReport::new("x", "n = 256", None);
        let b = StudyReport::new("x", "n = 256", None);
        assert_eq!(a.inputs_digest, b.inputs_digest);
        assert_eq!(a.inputs_digest.len(), 64);
        let mut r = a;
        assert!(r.passed());
        r.check(Check::at_most("c", 2.0, 1.0));
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }
}
