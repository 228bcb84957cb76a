use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical slacks shared by every layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Membership / feasibility slack.
    pub feas: f64,
    /// Minimum admissible generator norm.
    pub gen: f64,
    /// Slack for cone membership and cone equality.
    pub cone: f64,
    /// Margin the min-norm point of a base must keep from the origin.
    pub zero: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            feas: 1e-9,
            gen: 1e-9,
            cone: 1e-6,
            zero: 1e-3,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [self.feas, self.gen, self.cone, self.zero];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be finite and positive: {self:?}"
            )));
        }
        if self.zero <= self.cone {
            return Err(Error::InvalidArgument(format!(
                "zero margin {} must exceed cone slack {}",
                self.zero, self.cone
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        ToleranceConfig::default().validate().unwrap();
    }

    #[test]
    fn zero_must_exceed_cone() {
        let t = ToleranceConfig {
            zero: 1e-7,
            ..Default::default()
        };
        assert!(t.validate().is_err());
        let t = ToleranceConfig {
            feas: 0.0,
            ..Default::default()
        };
        assert!(t.validate().is_err());
    }
}
