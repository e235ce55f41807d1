use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use turnpike_core::{DirectOptions, ShootingOptions};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "direct")]
    Direct,
    #[serde(rename = "shoot-classic")]
    ShootClassic,
    #[serde(rename = "shoot-mid")]
    ShootMid,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Direct, Method::ShootClassic, Method::ShootMid];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::ShootClassic => "shoot-classic",
            Method::ShootMid => "shoot-mid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown method '{s}' (direct, shoot-classic, shoot-mid)")))
    }
}

/// Everything needed to reproduce one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `ex1`, `ex2`, `lq:<file>` or a path.
    pub problem: String,
    pub method: Method,
    pub horizon: f64,
    pub steps: usize,
    pub shooting: ShootingOptions,
    pub direct: DirectOptions,
}

impl RunConfig {
    pub fn new(problem: impl Into<String>, method: Method, horizon: f64, steps: usize) -> Self {
        Self {
            problem: problem.into(),
            method,
            horizon,
            steps,
            shooting: ShootingOptions::default(),
            direct: DirectOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(CliError::Config("T must be positive".into()));
        }
        if self.steps < 2 {
            return Err(CliError::Config(format!("steps must be at least 2, got {}", self.steps)));
        }
        let a = self.shooting.anchor_fraction;
        if !(a > 0.0 && a < 1.0) {
            return Err(CliError::Config(format!("anchor fraction must lie in (0, 1), got {a}")));
        }
        for (name, tol) in [("shooting tolerance", self.shooting.tolerance), ("direct tolerance", self.direct.tolerance)] {
            if !(tol > 0.0) {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Default step count for a horizon: 100 steps per time unit, at least 2.
pub fn default_steps(horizon: f64) -> usize {
    ((100.0 * horizon).round() as usize).max(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("newton".parse::<Method>().is_err());
    }

    #[test]
    fn validation() {
        let ok = RunConfig::new("ex1", Method::Direct, 10.0, 100);
        assert!(ok.validate().is_ok());

        let mut c = ok.clone();
        c.horizon = 0.0;
        assert_eq!(c.validate().unwrap_err().to_string(), "T must be positive");
        c.horizon = f64::NAN;
        assert_eq!(c.validate().unwrap_err().to_string(), "T must be positive");

        let mut c = ok.clone();
        c.steps = 1;
        assert!(c.validate().is_err());

        for a in [0.0, 1.0, -0.2] {
            let mut c = ok.clone();
            c.shooting.anchor_fraction = a;
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn steps_per_unit() {
        assert_eq!(default_steps(20.0), 2000);
        assert_eq!(default_steps(0.001), 2);
    }
}
