//! Seeded sample sets of context-query pairs.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`. Each sample
//! draws, in order: `N` atoms by rejection (coordinates uniform in `[0,1)`,
//! one `d`-vector at a time, rejected when within `ℓ1` distance `1e-3` of an
//! earlier atom), a weight vector uniformly from the lexicographic list of
//! `Δ_{C,N}`, and a query uniform in `[0,1)^d`.

use picnet::measures::{enumerate_weights, l1, ContextQuery, ContextWeights, PICMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

pub const MIN_SEPARATION: f64 = 1e-3;
pub const MAX_ATTEMPTS: usize = 100_000;

fn unit_vector(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random::<f64>()).collect()
}

/// `n` atoms in `[0,1)^d` with pairwise `ℓ1` separation at least [`MIN_SEPARATION`].
pub fn separated_atoms(rng: &mut impl Rng, n: usize, d: usize) -> Result<Vec<Vec<f64>>> {
    let mut atoms: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut attempts = 0;
    while atoms.len() < n {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(HarnessError::Config(format!(
                "could not place {n} separated atoms in dimension {d}"
            )));
        }
        let candidate = unit_vector(rng, d);
        if atoms.iter().all(|a| l1(a, &candidate) >= MIN_SEPARATION) {
            atoms.push(candidate);
        }
    }
    Ok(atoms)
}

fn weight_simplex(c: u32, n: usize) -> Result<Vec<ContextWeights>> {
    let simplex = enumerate_weights(c, n);
    if simplex.is_empty() {
        return Err(HarnessError::Config(format!(
            "no weights with C={c}, N={n}"
        )));
    }
    Ok(simplex)
}

fn random_measure(
    rng: &mut impl Rng,
    simplex: &[ContextWeights],
    n: usize,
    d: usize,
) -> Result<PICMeasure> {
    let atoms = separated_atoms(rng, n, d)?;
    let weights = simplex[rng.random_range(0..simplex.len())].clone();
    Ok(PICMeasure::new(atoms, weights)?)
}

/// `count` random measures with weights in `Δ_{C,N}`.
pub fn random_measures(
    rng: &mut impl Rng,
    c: u32,
    n: usize,
    d: usize,
    count: usize,
) -> Result<Vec<PICMeasure>> {
    let simplex = weight_simplex(c, n)?;
    (0..count)
        .map(|_| random_measure(rng, &simplex, n, d))
        .collect()
}

/// The sample set of an experiment.
pub fn generate_samples(config: &ExperimentConfig) -> Result<Vec<ContextQuery>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let simplex = weight_simplex(config.c, config.n)?;
    (0..config.num_samples)
        .map(|_| {
            let mu = random_measure(&mut rng, &simplex, config.n, config.d)?;
            Ok(ContextQuery::new(mu, unit_vector(&mut rng, config.d))?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(c: u32, n: usize, d: usize, samples: usize) -> ExperimentConfig {
        ExperimentConfig {
            c,
            n,
            d,
            m: 1,
            out_dim: 1,
            num_samples: samples,
            seed: 7,
            delta: 0.4,
            delta_star: 0.2,
            q: 1.0,
            target: "mean_shift".into(),
            moment_p: 1.0,
            deltas: None,
        }
    }

    #[test]
    fn seeded_sets_serialize_identically() {
        let cfg = config(4, 3, 2, 20);
        let a = serde_json::to_string(&generate_samples(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&generate_samples(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equal_context_gives_uniform_weights() {
        for s in generate_samples(&config(3, 3, 1, 10)).unwrap() {
            assert_eq!(s.context.weights().numerators(), &[1, 1, 1]);
        }
    }

    #[test]
    fn one_dimensional_atoms_are_distinct_and_in_range() {
        for s in generate_samples(&config(2, 2, 1, 10)).unwrap() {
            let atoms = s.context.atoms();
            assert!(atoms.iter().flatten().all(|&x| (0.0..=1.0).contains(&x)));
            assert!((atoms[0][0] - atoms[1][0]).abs() >= MIN_SEPARATION);
        }
    }

    #[test]
    fn impossible_packing_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // At most ~1000 atoms fit in [0,1) at spacing 1e-3.
        assert!(separated_atoms(&mut rng, 1500, 1).is_err());
    }
}
