//! Experiment configuration.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// One experiment. `deltas`, when present, sweeps several radii; each keeps
/// the ratio `delta_star / delta` of the base pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "C")]
    pub c: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "D")]
    pub out_dim: usize,
    pub num_samples: usize,
    pub seed: u64,
    pub delta: f64,
    pub delta_star: f64,
    pub q: f64,
    pub target: String,
    pub moment_p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.n == 0 || (self.c as usize) < self.n {
            return bad(format!("need C >= N >= 1, got C={} N={}", self.c, self.n));
        }
        if self.d == 0 || self.m == 0 || self.out_dim == 0 {
            return bad("d, M and D must be positive".into());
        }
        if !(self.delta_star > 0.0 && self.delta_star < self.delta && self.delta.is_finite()) {
            return bad(format!(
                "need 0 < delta_star < delta, got {} and {}",
                self.delta_star, self.delta
            ));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return bad(format!("q must be positive, got {}", self.q));
        }
        if !(self.moment_p >= 1.0 && self.moment_p.is_finite()) {
            return bad(format!(
                "moment_p must be at least 1, got {}",
                self.moment_p
            ));
        }
        if let Some(ds) = &self.deltas {
            if ds.is_empty() || ds.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
                return bad("deltas must be a nonempty list of positive radii".into());
            }
        }
        crate::targets::target_library(&self.target, self.m, self.out_dim)?;
        Ok(())
    }

    /// `(delta, delta_star)` for every row of the report.
    pub fn radii(&self) -> Vec<(f64, f64)> {
        match &self.deltas {
            None => vec![(self.delta, self.delta_star)],
            Some(ds) => {
                let ratio = self.delta_star / self.delta;
                ds.iter().map(|&d| (d, d * ratio)).collect()
            }
        }
    }
}
