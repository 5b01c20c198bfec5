//! Target functions from context-query pairs to uniform output measures.
//!
//! Lipschitz constants are with respect to `W1(μ, μ') + ‖x − x'‖₁` on inputs
//! and W1 between uniform `M`-atom measures on outputs.
//!
//! * `mean_shift`: `M` copies of `m(μ) + x`, where `m(μ)` is the weighted
//!   mean atom. `L = 1`, since `‖m(μ) − m(μ')‖₁ ≤ W1(μ, μ')`.
//! * `sorted_atoms`: atom `i` has coordinate `j` equal to the mean of the
//!   `j`-th marginal quantile function over `[i/M, (i+1)/M]`. Ignores the
//!   query. `L = 1`, since the matched distance is bounded by the sum of the
//!   marginal W1 distances, which is at most `W1(μ, μ')`.
//! * `barycentric`: the `sorted_atoms` output moved halfway toward `x`.
//!   `L = 1/2`.
//!
//! Vectors of dimension `d` are truncated or zero-padded to `D`.

use picnet::measures::{ContextQuery, OutputMeasure, PICMeasure};
use picnet::partition::TargetFunction;

use crate::error::{HarnessError, Result};

pub const TARGET_NAMES: [&str; 3] = ["mean_shift", "sorted_atoms", "barycentric"];

fn project(v: &[f64], dim: usize) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().take(dim).copied().collect();
    out.resize(dim, 0.0);
    out
}

/// Weighted mean atom, summed in lexicographic atom order so that it does not
/// depend on token order.
fn weighted_mean(mu: &PICMeasure) -> Vec<f64> {
    let mut order: Vec<usize> = (0..mu.len()).collect();
    order.sort_by(|&a, &b| {
        mu.atoms()[a]
            .iter()
            .zip(&mu.atoms()[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut mean = vec![0.0; mu.dim()];
    for i in order {
        let w = f64::from(mu.weights().numerators()[i]);
        for (m, a) in mean.iter_mut().zip(&mu.atoms()[i]) {
            *m += w * a;
        }
    }
    let c = f64::from(mu.context());
    mean.iter().map(|m| m / c).collect()
}

/// Averages of each marginal quantile function over `M` equal-mass bins.
fn quantile_bins(mu: &PICMeasure, m: usize) -> Vec<Vec<f64>> {
    let c = mu.context() as usize;
    let nums = mu.weights().numerators();
    let mut bins = vec![vec![0.0; mu.dim()]; m];
    for j in 0..mu.dim() {
        let mut order: Vec<usize> = (0..mu.len()).collect();
        order.sort_by(|&a, &b| mu.atoms()[a][j].total_cmp(&mu.atoms()[b][j]));
        // Work in units of 1/(C·M): atom `n` covers `nums[n]·M` units, bin `i` covers `C` units.
        let mut start = 0usize;
        for &n in &order {
            let end = start + nums[n] as usize * m;
            let value = mu.atoms()[n][j];
            for (i, bin) in bins.iter_mut().enumerate() {
                let overlap = end.min((i + 1) * c).saturating_sub(start.max(i * c));
                bin[j] += value * overlap as f64 / c as f64;
            }
            start = end;
        }
    }
    bins
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    MeanShift,
    SortedAtoms,
    Barycentric,
}

/// A named target with output shape `(M, D)`.
#[derive(Debug, Clone)]
pub struct LibraryTarget {
    kind: Kind,
    m: usize,
    dim: usize,
}

impl LibraryTarget {
    pub fn name(&self) -> &'static str {
        match self.kind {
            Kind::MeanShift => TARGET_NAMES[0],
            Kind::SortedAtoms => TARGET_NAMES[1],
            Kind::Barycentric => TARGET_NAMES[2],
        }
    }
}

impl TargetFunction for LibraryTarget {
    fn eval(&self, p: &ContextQuery) -> OutputMeasure {
        let atoms = match self.kind {
            Kind::MeanShift => {
                let shifted: Vec<f64> = weighted_mean(&p.context)
                    .iter()
                    .zip(&p.query)
                    .map(|(a, x)| a + x)
                    .collect();
                vec![project(&shifted, self.dim); self.m]
            }
            Kind::SortedAtoms => quantile_bins(&p.context, self.m)
                .iter()
                .map(|a| project(a, self.dim))
                .collect(),
            Kind::Barycentric => quantile_bins(&p.context, self.m)
                .iter()
                .map(|a| {
                    let mid: Vec<f64> =
                        a.iter().zip(&p.query).map(|(a, x)| 0.5 * (a + x)).collect();
                    project(&mid, self.dim)
                })
                .collect(),
        };
        OutputMeasure::new(atoms).expect("target atoms have the configured shape")
    }

    fn lipschitz(&self) -> f64 {
        match self.kind {
            Kind::MeanShift | Kind::SortedAtoms => 1.0,
            Kind::Barycentric => 0.5,
        }
    }

    fn output_shape(&self) -> (usize, usize) {
        (self.m, self.dim)
    }
}

/// Looks up a target by name.
pub fn target_library(name: &str, m: usize, dim: usize) -> Result<LibraryTarget> {
    let kind = match name {
        "mean_shift" => Kind::MeanShift,
        "sorted_atoms" => Kind::SortedAtoms,
        "barycentric" => Kind::Barycentric,
        other => {
            return Err(HarnessError::Config(format!(
                "unknown target `{other}`, expected one of {TARGET_NAMES:?}"
            )))
        }
    };
    if m == 0 || dim == 0 {
        return Err(HarnessError::Config("M and D must be positive".into()));
    }
    Ok(LibraryTarget { kind, m, dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use picnet::measures::ContextWeights;

    fn cq(atoms: Vec<Vec<f64>>, nums: Vec<u32>, c: u32, x: Vec<f64>) -> ContextQuery {
        let mu = PICMeasure::new(atoms, ContextWeights::new(nums, c).unwrap()).unwrap();
        ContextQuery::new(mu, x).unwrap()
    }

    #[test]
    fn mean_shift_of_dirac() {
        let f = target_library("mean_shift", 3, 2).unwrap();
        let out = f.eval(&cq(vec![vec![0.2, 0.5]], vec![1], 1, vec![0.1, 0.25]));
        assert_eq!(out.atoms(), vec![vec![0.2 + 0.1, 0.75]; 3]);
    }

    #[test]
    fn quantile_bins_split_mass() {
        // Weights 3/4 at 0 and 1/4 at 1; two bins average 0 and 1/2.
        let p = cq(vec![vec![1.0], vec![0.0]], vec![1, 3], 4, vec![0.0]);
        let f = target_library("sorted_atoms", 2, 1).unwrap();
        assert_eq!(f.eval(&p).atoms(), &[vec![0.0], vec![0.5]]);
        let g = target_library("barycentric", 2, 1).unwrap();
        assert_eq!(g.eval(&p).atoms(), &[vec![0.0], vec![0.25]]);
    }

    #[test]
    fn permutation_does_not_change_output() {
        let p = cq(
            vec![vec![0.1, 0.9], vec![0.4, 0.3], vec![0.8, 0.2]],
            vec![2, 1, 1],
            4,
            vec![0.3, 0.6],
        );
        let q = ContextQuery::new(p.context.permuted(&[2, 0, 1]), p.query.clone()).unwrap();
        for name in TARGET_NAMES {
            let f = target_library(name, 3, 3).unwrap();
            assert_eq!(f.eval(&p).canonical(), f.eval(&q).canonical(), "{name}");
        }
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(matches!(
            target_library("median", 1, 1),
            Err(HarnessError::Config(_))
        ));
    }
}
