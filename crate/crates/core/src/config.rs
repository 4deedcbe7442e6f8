use serde::{Deserialize, Serialize};

use crate::mi::{KsgEstimator, DEFAULT_JITTER};
use crate::{Error, Result};

/// Hyperparameters for estimation, refinement, and extrapolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// KSG neighbour count.
    pub k: usize,
    /// Columns kept after MI ranking.
    pub top_k: usize,
    /// Block-coordinate refinement sweeps.
    pub sweeps: usize,
    /// Objective evaluations allowed per item per sweep.
    pub per_item_evals: usize,
    /// Trust radius: max per-item displacement (max norm) in one refine call.
    pub delta: f64,
    /// SVR box constraint.
    #[serde(rename = "C", alias = "c")]
    pub c: f64,
    /// SVR tube half-width.
    pub epsilon: f64,
    pub gamma_override: Option<f64>,
    pub jitter_amplitude: f64,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            k: 3,
            top_k: 50,
            sweeps: 5,
            per_item_evals: 20,
            delta: 0.15,
            c: 10.0,
            epsilon: 0.01,
            gamma_override: None,
            jitter_amplitude: DEFAULT_JITTER,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.k < 1 {
            return bad("k must be >= 1");
        }
        if self.top_k < 1 {
            return bad("top_k must be >= 1");
        }
        if self.sweeps < 1 {
            return bad("sweeps must be >= 1");
        }
        if self.per_item_evals < 1 {
            return bad("per_item_evals must be >= 1");
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad("delta must lie in (0, 1]");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("C must be > 0");
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be >= 0");
        }
        if let Some(g) = self.gamma_override {
            if !(g > 0.0 && g.is_finite()) {
                return bad("gamma_override must be > 0");
            }
        }
        if !(self.jitter_amplitude >= 0.0 && self.jitter_amplitude.is_finite()) {
            return bad("jitter_amplitude must be >= 0");
        }
        Ok(())
    }

    pub fn estimator(&self) -> KsgEstimator {
        KsgEstimator::new(self.k, self.seed).with_jitter(self.jitter_amplitude)
    }

    /// Fewest touched items a refinement accepts.
    pub fn min_touched(&self) -> usize {
        self.k + 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = EngineConfig::default();
        c.validate().unwrap();
        assert_eq!((c.k, c.top_k, c.sweeps), (3, 50, 5));
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: EngineConfig = serde_json::from_str(r#"{"k": 4, "C": 2.5}"#).unwrap();
        assert_eq!(c.k, 4);
        assert_eq!(c.c, 2.5);
        assert_eq!(c.top_k, 50);
    }

    #[test]
    fn rejects_out_of_range() {
        for c in [
            EngineConfig { k: 0, ..Default::default() },
            EngineConfig { delta: 0.0, ..Default::default() },
            EngineConfig { delta: 1.5, ..Default::default() },
            EngineConfig { c: 0.0, ..Default::default() },
            EngineConfig { epsilon: -1.0, ..Default::default() },
            EngineConfig { gamma_override: Some(0.0), ..Default::default() },
        ] {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
