//! Randomized verification sweeps used by the CLI and the acceptance tests.

use picnet::measures::{w1_oracle, ContextWeights, PICMeasure};
use picnet::netbuilder::CompiledNet;
use picnet::transformer::{transformer_eval, TransformerNet};
use picnet::w1net::{eval_w1_net, ROLE_CONTEXTUAL, ROLE_FIXED, ROLE_UNIFORM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use crate::error::{HarnessError, Result};
use crate::samples::{random_measures, separated_atoms};

/// Tolerance for W1 network outputs against the assignment oracle.
pub const W1_TOL: f64 = 1e-6;
/// Tolerance for transformer outputs against the source network.
pub const EQUAL_TOL: f64 = 1e-9;

/// Outcome of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub trials: usize,
    pub max_err: f64,
    pub tolerance: f64,
}

impl Sweep {
    pub fn passed(&self) -> bool {
        self.max_err <= self.tolerance
    }

    /// Turns a failed sweep into a verification error.
    pub fn into_result(self, what: &str) -> Result<Sweep> {
        if self.passed() {
            Ok(self)
        } else {
            Err(HarnessError::Verification(format!(
                "{what}: max error {:e} exceeds {:e} over {} trials",
                self.max_err, self.tolerance, self.trials
            )))
        }
    }
}

fn param(params: &Value, key: &str) -> Result<u64> {
    params
        .get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| HarnessError::Config(format!("network params lack `{key}`")))
}

fn weights_param(params: &Value, key: &str, c: u32) -> Result<ContextWeights> {
    let nums: Vec<u32> = params
        .get(key)
        .cloned()
        .ok_or_else(|| HarnessError::Config(format!("network params lack `{key}`")))
        .and_then(|v| Ok(serde_json::from_value(v)?))?;
    Ok(ContextWeights::new(nums, c)?)
}

/// Random measure pairs matching the signature recorded in a W1 net.
pub fn w1_trial_pairs(
    net: &CompiledNet,
    trials: usize,
    seed: u64,
) -> Result<Vec<(PICMeasure, PICMeasure)>> {
    let params = net
        .params
        .as_ref()
        .ok_or_else(|| HarnessError::Config("network has no recorded params".into()))?;
    let n = param(params, "N")? as usize;
    let d = param(params, "d")? as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match net.role.as_deref() {
        Some(ROLE_UNIFORM) => (0..trials)
            .map(|_| {
                let a = PICMeasure::uniform(separated_atoms(&mut rng, n, d)?)?;
                let b = PICMeasure::uniform(separated_atoms(&mut rng, n, d)?)?;
                Ok((a, b))
            })
            .collect(),
        Some(ROLE_FIXED) => {
            let c = param(params, "C")? as u32;
            let (w, v) = (
                weights_param(params, "w", c)?,
                weights_param(params, "v", c)?,
            );
            (0..trials)
                .map(|_| {
                    let a = PICMeasure::new(separated_atoms(&mut rng, n, d)?, w.clone())?;
                    let b = PICMeasure::new(separated_atoms(&mut rng, n, d)?, v.clone())?;
                    Ok((a, b))
                })
                .collect()
        }
        Some(ROLE_CONTEXTUAL) => {
            let c = param(params, "C")? as u32;
            let a = random_measures(&mut rng, c, n, d, trials)?;
            let b = random_measures(&mut rng, c, n, d, trials)?;
            Ok(a.into_iter().zip(b).collect())
        }
        other => Err(HarnessError::Config(format!(
            "network role {other:?} is not a W1 network"
        ))),
    }
}

/// Largest `|net(μ, ν) − W1(μ, ν)|` over the given pairs.
pub fn w1_sweep(net: &CompiledNet, pairs: &[(PICMeasure, PICMeasure)]) -> Result<Sweep> {
    let errors: Vec<f64> = pairs
        .par_iter()
        .map(|(a, b)| Ok((eval_w1_net(net, a, b)? - w1_oracle(a, b)?).abs()))
        .collect::<Result<_>>()?;
    Ok(Sweep {
        trials: pairs.len(),
        max_err: errors.into_iter().fold(0.0, f64::max),
        tolerance: W1_TOL,
    })
}

/// Checks a compiled W1 net against the assignment oracle on seeded random pairs.
pub fn verify_w1(net: &CompiledNet, trials: usize, seed: u64) -> Result<Sweep> {
    w1_sweep(net, &w1_trial_pairs(net, trials, seed)?)?.into_result("W1 network")
}

/// Largest output difference between `mlp` and `tf` on inputs uniform in `[0,1)`.
pub fn equal_sweep(
    mlp: &CompiledNet,
    tf: &TransformerNet,
    trials: usize,
    seed: u64,
) -> Result<Sweep> {
    if mlp.input_dim() != tf.input_dim() || mlp.output_dim() != tf.output_dim() {
        return Err(HarnessError::Config(format!(
            "shapes differ: network {}→{}, transformer {}→{}",
            mlp.input_dim(),
            mlp.output_dim(),
            tf.input_dim(),
            tf.output_dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<Vec<f64>> = (0..trials)
        .map(|_| (0..mlp.input_dim()).map(|_| rng.random::<f64>()).collect())
        .collect();
    let errors: Vec<f64> = inputs
        .par_iter()
        .map(|x| {
            let (a, b) = (mlp.eval(x)?, transformer_eval(tf, x)?);
            Ok(a.iter()
                .zip(&b)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    Ok(Sweep {
        trials,
        max_err: errors.into_iter().fold(0.0, f64::max),
        tolerance: EQUAL_TOL,
    })
}

/// Structural conditions of a conversion: one head per token, equal depth
/// and width, and at most twice the nonzero parameters.
pub fn check_structure(mlp: &CompiledNet, tf: &TransformerNet) -> Result<()> {
    let fail = |msg: String| Err(HarnessError::Verification(msg));
    if let Some(b) = tf.blocks().iter().find(|b| b.heads.len() != tf.tokens()) {
        return fail(format!(
            "a block has {} heads for {} tokens",
            b.heads.len(),
            tf.tokens()
        ));
    }
    if (tf.depth(), tf.width()) != (mlp.depth(), mlp.width()) {
        return fail(format!(
            "depth/width {}/{} differ from {}/{}",
            tf.depth(),
            tf.width(),
            mlp.depth(),
            mlp.width()
        ));
    }
    if tf.nnz() > 2 * mlp.nnz() {
        return fail(format!("{} nonzeros exceed twice {}", tf.nnz(), mlp.nnz()));
    }
    Ok(())
}

/// Checks that `tf` computes the same map as `mlp` and satisfies [`check_structure`].
pub fn verify_equal(
    mlp: &CompiledNet,
    tf: &TransformerNet,
    trials: usize,
    seed: u64,
) -> Result<Sweep> {
    check_structure(mlp, tf)?;
    equal_sweep(mlp, tf, trials, seed)?.into_result("transformer")
}

#[cfg(test)]
mod tests {
    use super::*;
    use picnet::budget::Budget;
    use picnet::netbuilder::build_abs;
    use picnet::transformer::transformerify;
    use picnet::w1net::{build_w1_fixed_weights, build_w1_uniform};

    #[test]
    fn fresh_nets_verify() {
        let budget = Budget::default();
        assert!(verify_w1(&build_w1_uniform(2, 2, &budget).unwrap(), 50, 1).is_ok());
        let w = ContextWeights::new(vec![1, 2], 3).unwrap();
        let v = ContextWeights::new(vec![2, 1], 3).unwrap();
        assert!(verify_w1(&build_w1_fixed_weights(&w, &v, 1, &budget).unwrap(), 50, 1).is_ok());
    }

    #[test]
    fn non_w1_net_is_config_error() {
        assert!(matches!(
            verify_w1(&build_abs(), 5, 0),
            Err(HarnessError::Config(_))
        ));
    }

    #[test]
    fn tampered_transformer_fails() {
        let net = build_abs();
        let tf = transformerify(&net, 2).unwrap();
        assert!(verify_equal(&net, &tf, 100, 3).is_ok());
        let mut blocks = tf.blocks().to_vec();
        let head = &mut blocks.last_mut().unwrap().heads[0];
        head.v = head.v.scaled(1.5);
        let tampered = TransformerNet::new(blocks, 2).unwrap();
        assert!(matches!(
            verify_equal(&net, &tampered, 100, 3),
            Err(HarnessError::Verification(_))
        ));
    }
}
