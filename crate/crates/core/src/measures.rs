//! Permutation-invariant contexts and the combinatorial distance oracles.
//!
//! A context is a discrete probability measure `Σ w_n δ_{x_n}` over `N`
//! distinct tokens in `ℝ^d` whose weights are positive multiples of `1/C`.
//! Weights are stored as integer numerators over `C` so that membership in
//! the contextualized simplex is checked exactly; atom coordinates are `f64`.
//!
//! Every distance the compiled networks reproduce has an oracle here:
//! [`w1_oracle`] (ℓ1 ground cost, via uniform expansion to a `C × C`
//! assignment), [`quotient_dist`], [`kr_norm`] and [`pair_metric`].

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::assignment::{hungarian, permutations};
use crate::error::{check_dim, Error, Result};
use crate::simplex;

/// Absolute tolerance used when comparing distances produced by exact constructions.
pub const DIST_TOL: f64 = 1e-9;

/// ℓ1 distance between two equal-length points.
pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// A weight vector on the contextualized simplex: `N` positive multiples of `1/C` summing to one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextWeights {
    numerators: Vec<u32>,
    context: u32,
}

impl ContextWeights {
    pub fn new(numerators: Vec<u32>, context: u32) -> Result<Self> {
        if context == 0 {
            return Err(Error::Config("context window C must be positive".into()));
        }
        if numerators.is_empty() {
            return Err(Error::Config("a context needs at least one token".into()));
        }
        if numerators.contains(&0) {
            return Err(Error::Config(
                "every weight must be a positive multiple of 1/C".into(),
            ));
        }
        let total: u64 = numerators.iter().map(|&k| k as u64).sum();
        if total != context as u64 {
            return Err(Error::Config(format!(
                "weight numerators sum to {total}, expected C = {context}"
            )));
        }
        Ok(ContextWeights {
            numerators,
            context,
        })
    }

    /// The uniform vector `(1/N, …, 1/N)` with `C = N`.
    pub fn uniform(n: usize) -> Self {
        ContextWeights {
            numerators: vec![1; n],
            context: n as u32,
        }
    }

    pub fn numerators(&self) -> &[u32] {
        &self.numerators
    }

    /// The context window `C`.
    pub fn context(&self) -> u32 {
        self.context
    }

    /// The token count `N`.
    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.numerators[i] as f64 / self.context as f64
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    /// Weights reordered so that entry `i` of the result is entry `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        ContextWeights {
            numerators: perm.iter().map(|&i| self.numerators[i]).collect(),
            context: self.context,
        }
    }
}

/// All of `Δ_{C,N}`: positive compositions of `C` into `N` parts, lexicographically sorted.
///
/// Returns an empty list when `C < N` (no positive quantized vector sums to one).
pub fn enumerate_weights(c: u32, n: usize) -> Vec<ContextWeights> {
    fn rec(remaining: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        let max_first = remaining - (parts as u32 - 1);
        for k in 1..=max_first {
            prefix.push(k);
            rec(remaining - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    if n == 0 || c == 0 || (c as usize) < n {
        return Vec::new();
    }
    let mut out = Vec::new();
    rec(c, n, &mut Vec::with_capacity(n), &mut out);
    out.into_iter()
        .map(|numerators| ContextWeights {
            numerators,
            context: c,
        })
        .collect()
}

/// A permutation-invariant context: distinct atoms with weights in `Δ_{C,N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PicMeasureJson", into = "PicMeasureJson")]
pub struct PICMeasure {
    atoms: Vec<Vec<f64>>,
    weights: ContextWeights,
}

#[derive(Serialize, Deserialize)]
struct PicMeasureJson {
    #[serde(rename = "C")]
    c: u32,
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    atoms: Vec<Vec<f64>>,
    weights_num: Vec<u32>,
}

impl TryFrom<PicMeasureJson> for PICMeasure {
    type Error = Error;

    fn try_from(raw: PicMeasureJson) -> Result<Self> {
        check_dim(raw.n, raw.atoms.len())?;
        check_dim(raw.n, raw.weights_num.len())?;
        if let Some(atom) = raw.atoms.iter().find(|a| a.len() != raw.d) {
            return Err(Error::Dimension {
                expected: raw.d,
                got: atom.len(),
            });
        }
        PICMeasure::new(raw.atoms, ContextWeights::new(raw.weights_num, raw.c)?)
    }
}

impl From<PICMeasure> for PicMeasureJson {
    fn from(m: PICMeasure) -> Self {
        PicMeasureJson {
            c: m.weights.context,
            n: m.len(),
            d: m.dim(),
            atoms: m.atoms,
            weights_num: m.weights.numerators,
        }
    }
}

impl PICMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: ContextWeights) -> Result<Self> {
        check_dim(weights.len(), atoms.len())?;
        let d = atoms[0].len();
        if d == 0 {
            return Err(Error::Config("atoms must have positive dimension".into()));
        }
        for a in &atoms {
            check_dim(d, a.len())?;
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::Malformed("atom coordinates must be finite".into()));
            }
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                if atoms[i] == atoms[j] {
                    return Err(Error::Config(format!("atoms {i} and {j} coincide")));
                }
            }
        }
        Ok(PICMeasure { atoms, weights })
    }

    /// Uniform-weight context with `C = N`.
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len();
        if n == 0 {
            return Err(Error::Config("a context needs at least one token".into()));
        }
        PICMeasure::new(atoms, ContextWeights::uniform(n))
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &ContextWeights {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn context(&self) -> u32 {
        self.weights.context
    }

    /// Rows `(atom, weight)` reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> PICMeasure {
        PICMeasure {
            atoms: perm.iter().map(|&i| self.atoms[i].clone()).collect(),
            weights: self.weights.permuted(perm),
        }
    }

    /// Atoms flattened row-major: `N·d` values.
    pub fn flat_atoms(&self) -> Vec<f64> {
        self.atoms.iter().flatten().copied().collect()
    }

    /// Token layout consumed by the contextual networks: rows `(x_n, w_n)`, `N·(d+1)` values.
    pub fn token_block(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * (self.dim() + 1));
        for (n, atom) in self.atoms.iter().enumerate() {
            out.extend_from_slice(atom);
            out.push(self.weights.value(n));
        }
        out
    }

    /// The `C` atoms of mass `1/C` obtained by repeating atom `n` `C·w_n` times.
    pub fn expanded(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.context() as usize);
        for (atom, &k) in self.atoms.iter().zip(&self.weights.numerators) {
            for _ in 0..k {
                out.push(atom.as_slice());
            }
        }
        out
    }
}

/// A context paired with a query token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextQuery {
    pub context: PICMeasure,
    pub query: Vec<f64>,
}

impl ContextQuery {
    pub fn new(context: PICMeasure, query: Vec<f64>) -> Result<Self> {
        check_dim(context.dim(), query.len())?;
        Ok(ContextQuery { context, query })
    }

    /// Network input layout: the token block of the context followed by the query.
    pub fn network_input(&self) -> Vec<f64> {
        let mut v = self.context.token_block();
        v.extend_from_slice(&self.query);
        v
    }
}

/// A finite signed measure with distinct atoms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SignedDiscreteMeasure {
    atoms: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

impl SignedDiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        check_dim(atoms.len(), masses.len())?;
        if let Some(first) = atoms.first() {
            for a in &atoms {
                check_dim(first.len(), a.len())?;
            }
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                if atoms[i] == atoms[j] {
                    return Err(Error::Config(format!("atoms {i} and {j} coincide")));
                }
            }
        }
        Ok(SignedDiscreteMeasure { atoms, masses })
    }

    /// The zero measure.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a measure from possibly repeated `(atom, mass)` pairs, summing masses of equal atoms.
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (Vec<f64>, f64)>,
    {
        let mut pairs: Vec<(Vec<f64>, f64)> = pairs.into_iter().collect();
        pairs.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let mut atoms: Vec<Vec<f64>> = Vec::new();
        let mut masses: Vec<f64> = Vec::new();
        for (atom, mass) in pairs {
            match atoms.last() {
                Some(last) if *last == atom => *masses.last_mut().unwrap() += mass,
                _ => {
                    atoms.push(atom);
                    masses.push(mass);
                }
            }
        }
        SignedDiscreteMeasure { atoms, masses }
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// A uniform measure on `M ≥ 1` atoms in `ℝ^D` (atoms may repeat).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputMeasure {
    atoms: Vec<Vec<f64>>,
}

impl OutputMeasure {
    pub fn new(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = atoms.first() else {
            return Err(Error::Config("an output measure needs M ≥ 1 atoms".into()));
        };
        let dim = first.len();
        for a in &atoms {
            check_dim(dim, a.len())?;
        }
        Ok(OutputMeasure { atoms })
    }

    /// Reads an `M × D` row-major atom block.
    pub fn from_flat(values: &[f64], m: usize, dim: usize) -> Result<Self> {
        check_dim(m * dim, values.len())?;
        OutputMeasure::new(values.chunks(dim).map(<[f64]>::to_vec).collect())
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    /// Same measure with atoms in lexicographic order.
    pub fn canonical(&self) -> OutputMeasure {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| lex_cmp(a, b));
        OutputMeasure { atoms }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.atoms.iter().flatten().copied().collect()
    }

    /// `(atom, scale/M)` pairs, for building signed mixtures.
    pub fn weighted_atoms(&self, scale: f64) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        let mass = scale / self.len() as f64;
        self.atoms.iter().map(move |a| (a.clone(), mass))
    }
}

fn check_compatible(a: &PICMeasure, b: &PICMeasure) -> Result<()> {
    if a.context() != b.context() {
        return Err(Error::Config(format!(
            "context windows differ: {} vs {}",
            a.context(),
            b.context()
        )));
    }
    if a.len() != b.len() {
        return Err(Error::Config(format!(
            "token counts differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.dim() != b.dim() {
        return Err(Error::Config(format!(
            "dimensions differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

fn uniform_assignment_cost(a: &[&[f64]], b: &[&[f64]]) -> f64 {
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| l1(x, y)).collect())
        .collect();
    hungarian(&cost).1 / a.len() as f64
}

/// Exact W1 between two contexts with ℓ1 ground cost.
///
/// Each measure is expanded into `C` atoms of mass `1/C` and the resulting
/// `C × C` assignment problem is solved.
pub fn w1_oracle(a: &PICMeasure, b: &PICMeasure) -> Result<f64> {
    check_compatible(a, b)?;
    Ok(uniform_assignment_cost(&a.expanded(), &b.expanded()))
}

/// W1 (ℓ1 ground cost) between two uniform measures with the same number of atoms.
pub fn w1_uniform(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let a: Vec<&[f64]> = a.iter().map(Vec::as_slice).collect();
    let b: Vec<&[f64]> = b.iter().map(Vec::as_slice).collect();
    Ok(uniform_assignment_cost(&a, &b))
}

/// W1 between two output measures.
pub fn w1_output(a: &OutputMeasure, b: &OutputMeasure) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    w1_uniform(&a.atoms, &b.atoms)
}

/// `min_Π ‖ΠX − Y‖_F` over all row permutations, by exhaustive search.
pub fn quotient_dist(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Config(format!(
            "row counts differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if let (Some(x0), Some(y0)) = (x.first(), y.first()) {
        if x.iter().chain(y).any(|r| r.len() != x0.len()) || x0.len() != y0.len() {
            return Err(Error::Config("rows must share one dimension".into()));
        }
    }
    let best = permutations(x.len())
        .iter()
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(n, &m)| {
                    x[m].iter()
                        .zip(&y[n])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    Ok(best.sqrt())
}

/// Kantorovich–Rubinstein norm `sup Σ m_i f(z_i)` over `‖f‖∞ + Lip(f) ≤ 1` (ℓ1 ground metric).
///
/// Solved as a linear program over the atom values `f_i` and the budget split
/// `(a, b)`: `|f_i| ≤ a`, `|f_i − f_j| ≤ b‖z_i − z_j‖₁`, `a + b ≤ 1`.
/// The substitution `g_i = f_i + a ≥ 0` puts it in the origin-feasible form
/// accepted by [`simplex::maximize`].
pub fn kr_norm(m: &SignedDiscreteMeasure) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    // variables: g_0..g_{n-1}, a, b
    let nv = n + 2;
    let (ia, ib) = (n, n + 1);
    let total: f64 = m.masses.iter().sum();
    let mut c = vec![0.0; nv];
    c[..n].copy_from_slice(&m.masses);
    c[ia] = -total;

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..n {
        let mut r = vec![0.0; nv];
        r[i] = 1.0;
        r[ia] = -2.0;
        rows.push(r);
        rhs.push(0.0);
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut r = vec![0.0; nv];
            r[i] = 1.0;
            r[j] = -1.0;
            r[ib] = -l1(&m.atoms[i], &m.atoms[j]);
            rows.push(r);
            rhs.push(0.0);
        }
    }
    let mut budget = vec![0.0; nv];
    budget[ia] = 1.0;
    budget[ib] = 1.0;
    rows.push(budget);
    rhs.push(1.0);

    let sol =
        simplex::maximize(&c, &rows, &rhs).expect("KR program is bounded and origin-feasible");
    sol.value.max(0.0)
}

/// `W1(μ, ν) + ‖x − z‖₁`, the metric on context-query pairs.
pub fn pair_metric(p: &ContextQuery, q: &ContextQuery) -> Result<f64> {
    check_dim(p.query.len(), q.query.len())?;
    Ok(w1_oracle(&p.context, &q.context)? + l1(&p.query, &q.query))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(nums: &[u32], c: u32) -> ContextWeights {
        ContextWeights::new(nums.to_vec(), c).unwrap()
    }

    fn pic(atoms: &[&[f64]], nums: &[u32], c: u32) -> PICMeasure {
        PICMeasure::new(atoms.iter().map(|a| a.to_vec()).collect(), w(nums, c)).unwrap()
    }

    #[test]
    fn enumerate_weights_examples() {
        assert_eq!(enumerate_weights(2, 2), vec![w(&[1, 1], 2)]);
        assert_eq!(enumerate_weights(1, 1), vec![w(&[1], 1)]);
        assert_eq!(
            enumerate_weights(4, 3),
            vec![w(&[1, 1, 2], 4), w(&[1, 2, 1], 4), w(&[2, 1, 1], 4)]
        );
        assert!(enumerate_weights(2, 3).is_empty());
    }

    #[test]
    fn weights_reject_invalid() {
        assert!(ContextWeights::new(vec![1, 0, 1], 2).is_err());
        assert!(ContextWeights::new(vec![1, 1], 3).is_err());
        assert!(ContextWeights::new(vec![], 3).is_err());
    }

    #[test]
    fn pic_rejects_duplicate_atoms() {
        let r = PICMeasure::new(vec![vec![0.0], vec![0.0]], w(&[1, 1], 2));
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn w1_examples() {
        let a = pic(&[&[0.0], &[1.0]], &[1, 1], 2);
        assert_eq!(w1_oracle(&a, &a).unwrap(), 0.0);
        let d0 = pic(&[&[0.0]], &[1], 1);
        let d1 = pic(&[&[1.0]], &[1], 1);
        assert_eq!(w1_oracle(&d0, &d1).unwrap(), 1.0);
        let b = pic(&[&[0.0], &[3.0]], &[1, 1], 2);
        assert!((w1_oracle(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w1_rejects_mismatch() {
        let a = pic(&[&[0.0], &[1.0]], &[1, 1], 2);
        let b = pic(&[&[0.0], &[1.0]], &[1, 3], 4);
        assert!(matches!(w1_oracle(&a, &b), Err(Error::Config(_))));
        let c = pic(&[&[0.0, 0.0], &[1.0, 0.0]], &[1, 1], 2);
        assert!(w1_oracle(&a, &c).is_err());
    }

    #[test]
    fn quotient_examples() {
        let x = vec![vec![0.0], vec![1.0]];
        assert_eq!(quotient_dist(&x, &x).unwrap(), 0.0);
        assert_eq!(quotient_dist(&x, &[vec![1.0], vec![0.0]]).unwrap(), 0.0);
        let x = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let y = vec![vec![0.0, 0.0], vec![0.0, 1.0]];
        assert!((quotient_dist(&x, &y).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(quotient_dist(&x, &y[..1]).is_err());
    }

    #[test]
    fn kr_examples() {
        assert_eq!(kr_norm(&SignedDiscreteMeasure::zero()), 0.0);
        let dirac = SignedDiscreteMeasure::new(vec![vec![0.0]], vec![1.0]).unwrap();
        assert!((kr_norm(&dirac) - 1.0).abs() < 1e-12);
        // δ0 − δ1: best split is a = 1/3, b = 2/3
        let dipole =
            SignedDiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![1.0, -1.0]).unwrap();
        assert!((kr_norm(&dipole) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn signed_from_pairs_merges() {
        let m = SignedDiscreteMeasure::from_pairs(vec![
            (vec![1.0], 0.5),
            (vec![0.0], 1.0),
            (vec![1.0], -0.5),
        ]);
        assert_eq!(m.atoms(), &[vec![0.0], vec![1.0]]);
        assert_eq!(m.masses(), &[1.0, 0.0]);
    }

    #[test]
    fn pair_metric_examples() {
        let a = pic(&[&[0.0, 0.0], &[1.0, 1.0]], &[1, 1], 2);
        let p = ContextQuery::new(a.clone(), vec![0.0, 0.0]).unwrap();
        assert_eq!(pair_metric(&p, &p).unwrap(), 0.0);
        let q = ContextQuery::new(a, vec![1.0, 1.0]).unwrap();
        assert_eq!(pair_metric(&p, &q).unwrap(), 2.0);
        let p = ContextQuery::new(pic(&[&[0.0]], &[1], 1), vec![0.0]).unwrap();
        let q = ContextQuery::new(pic(&[&[1.0]], &[1], 1), vec![2.0]).unwrap();
        assert_eq!(pair_metric(&p, &q).unwrap(), 3.0);
        assert!(ContextQuery::new(pic(&[&[1.0]], &[1], 1), vec![2.0, 0.0]).is_err());
    }

    #[test]
    fn json_layout() {
        let a = pic(&[&[0.5, 1.0], &[2.0, -1.0]], &[3, 1], 4);
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(
            text,
            r#"{"C":4,"N":2,"d":2,"atoms":[[0.5,1.0],[2.0,-1.0]],"weights_num":[3,1]}"#
        );
        let back: PICMeasure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
        let bad = r#"{"C":4,"N":2,"d":2,"atoms":[[0.5,1.0],[2.0,-1.0]],"weights_num":[2,1]}"#;
        assert!(serde_json::from_str::<PICMeasure>(bad).is_err());
    }

    #[test]
    fn token_block_layout() {
        let a = pic(&[&[0.5, 1.0], &[2.0, -1.0]], &[3, 1], 4);
        assert_eq!(a.token_block(), vec![0.5, 1.0, 0.75, 2.0, -1.0, 0.25]);
        assert_eq!(a.expanded().len(), 4);
    }
}
