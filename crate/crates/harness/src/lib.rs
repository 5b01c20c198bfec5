//! Sample generation, target functions, experiments and verification sweeps
//! on top of `picnet`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod samples;
pub mod targets;
pub mod verify;

pub use error::{HarnessError, Result};

use picnet::budget::Budget;

/// Name of the environment variable holding enumeration budget overrides.
pub const BUDGET_ENV: &str = "PICNET_BUDGET";

/// Budget from [`BUDGET_ENV`], or the default when unset.
pub fn budget_from_env() -> Result<Budget> {
    match std::env::var(BUDGET_ENV) {
        Ok(spec) => Ok(Budget::parse(&spec)?),
        Err(_) => Ok(Budget::default()),
    }
}
