//! Enumeration budgets shared by the W1 compilers.

use crate::error::{Error, Result};

/// Upper limits on the combinatorial enumerations behind the W1 networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of permutations enumerated by the uniform W1 network (N!).
    pub permutations: usize,
    /// Maximum number of ordered weight pairs in the contextual W1 network (|Δ|²).
    pub weight_pairs: usize,
    /// Maximum number of edge subsets examined while enumerating transport-polytope vertices.
    pub forest_candidates: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            permutations: 120,
            weight_pairs: 200,
            forest_candidates: 5_000_000,
        }
    }
}

impl Budget {
    /// Parses an override string of the form `permutations=720,weight_pairs=400`.
    ///
    /// Keys that are not mentioned keep their default value. A bare integer
    /// overrides every limit at once.
    pub fn parse(spec: &str) -> Result<Budget> {
        let mut budget = Budget::default();
        let spec = spec.trim();
        if spec.is_empty() {
            return Ok(budget);
        }
        if let Ok(all) = spec.parse::<usize>() {
            return Ok(Budget {
                permutations: all,
                weight_pairs: all,
                forest_candidates: all,
            });
        }
        for item in spec.split(',') {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("budget entry `{item}` is not key=value")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("budget value `{value}` is not an integer")))?;
            match key.trim() {
                "permutations" => budget.permutations = value,
                "weight_pairs" => budget.weight_pairs = value,
                "forest_candidates" => budget.forest_candidates = value,
                other => return Err(Error::Config(format!("unknown budget key `{other}`"))),
            }
        }
        Ok(budget)
    }
}
