//! Exact Wasserstein-1 networks.
//!
//! * [`build_w1_uniform`]: uniform weights, minimum over all `N!` matchings.
//! * [`build_w1_fixed_weights`]: fixed weight vectors, minimum over the vertices
//!   of the transport polytope.
//! * [`build_w1_contextual`]: any weights in `Δ_{C,N}`, a gated sum of
//!   fixed-weight networks, one per weight pair.
//!
//! Input layouts: the uniform and fixed-weight nets read `[X, Y]` with each
//! atom matrix flattened row-major (`2·N·d` values). The contextual net reads
//! two token blocks `[(x_1, w_1), …, (x_N, w_N), (y_1, v_1), …]`
//! (`2·N·(d+1)` values), see [`PICMeasure::token_block`].

use std::collections::BTreeSet;

use serde_json::json;

use crate::assignment::{factorial, permutations};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::measures::{enumerate_weights, ContextWeights, PICMeasure};
use crate::netbuilder::{
    after, before, build_inner_product, build_l1_norm_shallow, build_min, build_mult,
    build_threshold, compose, fix_inputs, parallelize_shallow, stack, Affine, CompiledNet,
};
use crate::sparse::SparseMatrix;

pub const ROLE_UNIFORM: &str = "w1_uniform";
pub const ROLE_FIXED: &str = "w1_fixed";
pub const ROLE_CONTEXTUAL: &str = "w1_contextual";

/// Depth of [`build_w1_uniform`] is at most this constant times `N·(d + log₂ N!)`.
pub const UNIFORM_DEPTH_CONST: f64 = 2.0;
/// Width of [`build_w1_uniform`] is at most this constant times `N!·N²·d`.
pub const UNIFORM_WIDTH_CONST: f64 = 2.0;

/// A vertex of the transport polytope `U(w, v)`.
///
/// Entries are stored as integer numerators over `C`: vertices of a
/// transportation polytope with integral margins are integral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportVertex {
    plan_num: Vec<Vec<u32>>,
    w: ContextWeights,
    v: ContextWeights,
}

impl TransportVertex {
    pub fn plan_numerators(&self) -> &[Vec<u32>] {
        &self.plan_num
    }

    pub fn plan(&self) -> Vec<Vec<f64>> {
        let c = self.w.context() as f64;
        self.plan_num
            .iter()
            .map(|r| r.iter().map(|&k| k as f64 / c).collect())
            .collect()
    }

    pub fn marginals(&self) -> (&ContextWeights, &ContextWeights) {
        (&self.w, &self.v)
    }

    /// Nonzero entries `(i, j, P_ij)`.
    pub fn support(&self) -> Vec<(usize, usize, f64)> {
        let c = self.w.context() as f64;
        let mut out = Vec::new();
        for (i, row) in self.plan_num.iter().enumerate() {
            for (j, &k) in row.iter().enumerate() {
                if k > 0 {
                    out.push((i, j, k as f64 / c));
                }
            }
        }
        out
    }

    /// `⟨cost, P⟩`.
    pub fn cost(&self, cost: &[Vec<f64>]) -> f64 {
        self.support().iter().map(|&(i, j, p)| p * cost[i][j]).sum()
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Solves the marginal system on a spanning tree of `K_{N,N}` by peeling leaves.
///
/// Returns `None` when the unique solution has a negative entry.
fn solve_tree(n: usize, edges: &[(usize, usize)], w: &[u32], v: &[u32]) -> Option<Vec<Vec<u32>>> {
    // nodes 0..n are rows, n..2n are columns
    let mut residual: Vec<i64> = w.iter().chain(v).map(|&k| k as i64).collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); 2 * n];
    for (e, &(i, j)) in edges.iter().enumerate() {
        incident[i].push(e);
        incident[n + j].push(e);
    }
    let mut alive = vec![true; edges.len()];
    let mut degree: Vec<usize> = incident.iter().map(Vec::len).collect();
    let mut leaves: Vec<usize> = (0..2 * n).filter(|&u| degree[u] == 1).collect();
    let mut plan = vec![vec![0u32; n]; n];
    while let Some(u) = leaves.pop() {
        if degree[u] != 1 {
            continue;
        }
        let e = *incident[u].iter().find(|&&e| alive[e]).unwrap();
        alive[e] = false;
        let (i, j) = edges[e];
        let other = if u == i { n + j } else { i };
        let value = residual[u];
        if value < 0 {
            return None;
        }
        plan[i][j] = value as u32;
        residual[u] = 0;
        residual[other] -= value;
        degree[u] = 0;
        degree[other] -= 1;
        if degree[other] == 1 {
            leaves.push(other);
        }
    }
    residual.iter().all(|&r| r == 0).then_some(plan)
}

/// All vertices of `U(w, v)`, from the spanning trees of `K_{N,N}`.
///
/// Every vertex is a basic feasible solution whose support lies in a spanning
/// tree; each tree determines a unique plan. Plans with a negative entry are
/// discarded and the rest deduplicated exactly on their integer numerators.
pub fn enumerate_transport_vertices(
    w: &ContextWeights,
    v: &ContextWeights,
    budget: &Budget,
) -> Result<Vec<TransportVertex>> {
    if w.len() != v.len() || w.context() != v.context() {
        return Err(Error::Config(format!(
            "marginals differ in shape: (N={}, C={}) vs (N={}, C={})",
            w.len(),
            w.context(),
            v.len(),
            v.context()
        )));
    }
    let n = w.len();
    let all_edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let k = 2 * n - 1;
    let candidates = binomial(all_edges.len(), k);
    if candidates > budget.forest_candidates {
        return Err(Error::Capacity(format!(
            "{candidates} edge subsets exceed the forest budget of {}",
            budget.forest_candidates
        )));
    }

    let mut seen: BTreeSet<Vec<Vec<u32>>> = BTreeSet::new();
    let mut idx: Vec<usize> = (0..k).collect();
    let m = all_edges.len();
    let mut chosen = Vec::with_capacity(k);
    loop {
        let mut parent: Vec<usize> = (0..2 * n).collect();
        let mut acyclic = true;
        for &e in &idx {
            let (i, j) = all_edges[e];
            let (a, b) = (find(&mut parent, i), find(&mut parent, n + j));
            if a == b {
                acyclic = false;
                break;
            }
            parent[a] = b;
        }
        if acyclic {
            chosen.clear();
            chosen.extend(idx.iter().map(|&e| all_edges[e]));
            if let Some(plan) = solve_tree(n, &chosen, w.numerators(), v.numerators()) {
                seen.insert(plan);
            }
        }
        // next combination
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + m - k) else {
            break;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
    Ok(seen
        .into_iter()
        .map(|plan_num| TransportVertex {
            plan_num,
            w: w.clone(),
            v: v.clone(),
        })
        .collect())
}

/// `min_k ⟨cost, P_k⟩` over the given vertices.
pub fn vertex_min_cost(vertices: &[TransportVertex], cost: &[Vec<f64>]) -> f64 {
    vertices
        .iter()
        .map(|p| p.cost(cost))
        .fold(f64::INFINITY, f64::min)
}

fn check_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::Config(format!("{name} must be positive")));
    }
    Ok(())
}

/// Affine map from `[X, Y]` to the stacked differences `x_n − y_m`, pairs `(n, m)` row-major.
fn pair_differences(
    n: usize,
    d: usize,
    x_at: impl Fn(usize, usize) -> usize,
    y_at: impl Fn(usize, usize) -> usize,
    input_dim: usize,
) -> Affine {
    let mut rows = Vec::with_capacity(n * n * d);
    for a in 0..n {
        for b in 0..n {
            for k in 0..d {
                rows.push(vec![(x_at(a, k), 1.0), (y_at(b, k), -1.0)]);
            }
        }
    }
    Affine::linear(SparseMatrix::from_rows(input_dim, rows))
}

/// Net mapping `[X, Y]` to the `N²` ground costs `‖x_n − y_m‖₁` (depth 1).
fn cost_matrix_net(n: usize, d: usize) -> Result<CompiledNet> {
    let gadgets = vec![build_l1_norm_shallow(d)?; n * n];
    let norms = parallelize_shallow(&gadgets)?;
    before(
        &norms,
        &pair_differences(n, d, |a, k| a * d + k, |b, k| n * d + b * d + k, 2 * n * d),
    )
}

/// Exact W1 between uniform measures on `N` atoms in `ℝ^d`, input `[X, Y]`.
///
/// The `N²` ground costs feed an averaging map for each of the `N!` matchings,
/// followed by a min-tree.
pub fn build_w1_uniform(n: usize, d: usize, budget: &Budget) -> Result<CompiledNet> {
    check_positive("N", n)?;
    check_positive("d", d)?;
    let count = factorial(n);
    if count > budget.permutations {
        return Err(Error::Capacity(format!(
            "N! = {count} matchings exceed the permutation budget of {}",
            budget.permutations
        )));
    }
    let costs = cost_matrix_net(n, d)?;
    let inv = 1.0 / n as f64;
    let rows = permutations(n)
        .into_iter()
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(a, &b)| (a * n + b, inv))
                .collect()
        })
        .collect();
    let averages = after(
        &Affine::linear(SparseMatrix::from_rows(n * n, rows)),
        &costs,
    )?;
    let net = compose(&build_min(count)?, &averages)?;
    Ok(net.with_role(ROLE_UNIFORM, json!({ "N": n, "d": d })))
}

/// `min_k ⟨cost, P_k⟩` as a net on the `N²` ground costs.
fn vertex_min_net(vertices: &[TransportVertex], n: usize) -> Result<CompiledNet> {
    let mut branches = Vec::with_capacity(vertices.len());
    for vertex in vertices {
        let support = vertex.support();
        let s = support.len();
        let fixed: Vec<(usize, f64)> = support
            .iter()
            .enumerate()
            .map(|(t, &(_, _, p))| (s + t, p))
            .collect();
        let product = fix_inputs(&build_inner_product(s)?, &fixed)?;
        let select = SparseMatrix::from_rows(
            n * n,
            support
                .iter()
                .map(|&(i, j, _)| vec![(i * n + j, 1.0)])
                .collect(),
        );
        branches.push(before(&product, &Affine::linear(select))?);
    }
    compose(&build_min(vertices.len())?, &stack(&branches)?)
}

fn fixed_weights_core(
    w: &ContextWeights,
    v: &ContextWeights,
    d: usize,
    budget: &Budget,
) -> Result<CompiledNet> {
    check_positive("d", d)?;
    let vertices = enumerate_transport_vertices(w, v, budget)?;
    compose(
        &vertex_min_net(&vertices, w.len())?,
        &cost_matrix_net(w.len(), d)?,
    )
}

/// Exact W1 between measures carrying the weights `w` and `v`, input `[X, Y]`.
pub fn build_w1_fixed_weights(
    w: &ContextWeights,
    v: &ContextWeights,
    d: usize,
    budget: &Budget,
) -> Result<CompiledNet> {
    let net = fixed_weights_core(w, v, d, budget)?;
    Ok(net.with_role(
        ROLE_FIXED,
        json!({ "C": w.context(), "N": w.len(), "d": d, "w": w.numerators(), "v": v.numerators() }),
    ))
}

/// Exact W1 on all pairs of contexts with weights in `Δ_{C,N}`, input two token blocks.
///
/// Each weight pair `(w̃, ṽ)` contributes `gate · W1_{w̃,ṽ}(X, Y)` where the gate
/// is the threshold ramp applied to `‖w − w̃‖₁ + ‖v − ṽ‖₁`. Distinct grid
/// weights are at least `2/C` apart in ℓ1, so on grid inputs exactly one gate
/// is open.
pub fn build_w1_contextual(c: u32, n: usize, d: usize, budget: &Budget) -> Result<CompiledNet> {
    check_positive("N", n)?;
    check_positive("d", d)?;
    let simplex = enumerate_weights(c, n);
    if simplex.is_empty() {
        return Err(Error::Config(format!(
            "Δ_(C,N) is empty for C = {c} < N = {n}"
        )));
    }
    let pairs = simplex.len() * simplex.len();
    if pairs > budget.weight_pairs {
        return Err(Error::Capacity(format!(
            "{pairs} weight pairs exceed the budget of {}",
            budget.weight_pairs
        )));
    }

    let token = d + 1;
    let input_dim = 2 * n * token;
    let atoms_rows: Vec<Vec<(usize, f64)>> = (0..2 * n)
        .flat_map(|t| (0..d).map(move |k| vec![(t * token + k, 1.0)]))
        .collect();
    let atoms = Affine::linear(SparseMatrix::from_rows(input_dim, atoms_rows));
    let weight_rows: Vec<Vec<(usize, f64)>> =
        (0..2 * n).map(|t| vec![(t * token + d, 1.0)]).collect();
    let weight_select = SparseMatrix::from_rows(input_dim, weight_rows);

    let gate_core = compose(&build_threshold(c)?, &build_l1_norm_shallow(2 * n)?)?;
    let mut gates = Vec::with_capacity(pairs);
    let mut values = Vec::with_capacity(pairs);
    for wt in &simplex {
        for vt in &simplex {
            let target: Vec<f64> = wt
                .to_f64()
                .into_iter()
                .chain(vt.to_f64())
                .map(|x| -x)
                .collect();
            let shift = Affine::new(weight_select.clone(), target)?;
            gates.push(before(&gate_core, &shift)?);
            values.push(before(&fixed_weights_core(wt, vt, d, budget)?, &atoms)?);
        }
    }
    gates.extend(values);
    let branches = stack(&gates)?;
    let gated = after(&Affine::sum(pairs), &build_mult(pairs)?)?;
    let net = compose(&gated, &branches)?;
    Ok(net.with_role(ROLE_CONTEXTUAL, json!({ "C": c, "N": n, "d": d })))
}

/// Input vector `[X, Y]` for the uniform and fixed-weight nets.
pub fn atoms_input(a: &PICMeasure, b: &PICMeasure) -> Vec<f64> {
    let mut v = a.flat_atoms();
    v.extend(b.flat_atoms());
    v
}

/// Input vector (two token blocks) for the contextual net.
pub fn contextual_input(a: &PICMeasure, b: &PICMeasure) -> Vec<f64> {
    let mut v = a.token_block();
    v.extend(b.token_block());
    v
}

/// Evaluates a role-tagged W1 net on a pair of measures, choosing the input layout from the role.
pub fn eval_w1_net(net: &CompiledNet, a: &PICMeasure, b: &PICMeasure) -> Result<f64> {
    let input = match net.role.as_deref() {
        Some(ROLE_CONTEXTUAL) => contextual_input(a, b),
        Some(ROLE_UNIFORM) | Some(ROLE_FIXED) => atoms_input(a, b),
        other => {
            return Err(Error::Config(format!(
                "network role {other:?} is not a W1 network"
            )))
        }
    };
    net.eval_scalar(&input)
}
