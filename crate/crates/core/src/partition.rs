//! Packings, retracted Voronoi cells and the compiled piecewise-constant approximator.
//!
//! Given landmarks `(μᵏ, xᵏ)` chosen as a δ-packing of a sample set, cell `k`
//! is the ball of radius `δ*` around landmark `k` minus the radius-`δ` balls
//! of all earlier landmarks. Samples in no cell form the trifling region.
//!
//! The compiled approximator computes, for every landmark, the distance
//! `d_k = W1(μ, μᵏ) + ‖x − xᵏ‖₁` with an exact W1 network, a bump
//! `g_k = φ(d_k)` that is 1 below `δ*` and 0 above `δ`, and then the chain
//!
//! ```text
//! P_0 = 1,   Φ_k = g_k · P_k,   P_{k+1} = P_k · (1 − Φ_k)
//! ```
//!
//! so that `Φ_k` is the indicator of cell `k` off the trifling region. The
//! output is `Σ_k ν_k Φ_k` with `ν_k` the target value at landmark `k`.

use std::sync::Arc;

use crate::budget::Budget;
use crate::error::{check_dim, Error, Result};
use crate::measures::{
    kr_norm, pair_metric, w1_output, ContextQuery, OutputMeasure, SignedDiscreteMeasure,
};
use crate::netbuilder::{
    after, before, build_bump, build_l1_norm_shallow, compose, fix_inputs, stack, ActivationParams,
    Affine, CompiledNet, Layer,
};
use crate::sparse::SparseMatrix;
use crate::w1net::build_w1_contextual;

/// A nondecreasing modulus of continuity `ω` with `ω(0) = 0`, and its inverse.
#[derive(Clone)]
pub struct ModulusOfContinuity {
    omega: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    inverse: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for ModulusOfContinuity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModulusOfContinuity")
            .finish_non_exhaustive()
    }
}

impl ModulusOfContinuity {
    /// `ω(t) = L·t`.
    pub fn linear(lipschitz: f64) -> Self {
        ModulusOfContinuity {
            omega: Arc::new(move |t| lipschitz * t),
            inverse: Arc::new(move |e| {
                if lipschitz > 0.0 {
                    e / lipschitz
                } else {
                    f64::INFINITY
                }
            }),
        }
    }

    /// A user-supplied modulus, validated for `ω(0) = 0` and monotonicity on `grid`.
    pub fn new<F, G>(omega: F, inverse: G, grid: &[f64]) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if omega(0.0) != 0.0 {
            return Err(Error::Config(
                "modulus of continuity must vanish at 0".into(),
            ));
        }
        let mut sorted = grid.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.first().is_some_and(|&t| t < 0.0) {
            return Err(Error::Config("modulus grid must be nonnegative".into()));
        }
        if sorted.windows(2).any(|w| omega(w[0]) > omega(w[1])) {
            return Err(Error::Config(
                "modulus of continuity must be nondecreasing".into(),
            ));
        }
        Ok(ModulusOfContinuity {
            omega: Arc::new(omega),
            inverse: Arc::new(inverse),
        })
    }

    pub fn at(&self, t: f64) -> f64 {
        (self.omega)(t)
    }

    pub fn inverse_at(&self, eps: f64) -> f64 {
        (self.inverse)(eps)
    }
}

/// A contextual target `f : (μ, x) ↦ uniform measure on M atoms in ℝ^D`.
pub trait TargetFunction: Send + Sync {
    fn eval(&self, p: &ContextQuery) -> OutputMeasure;

    /// Lipschitz constant with respect to the pair metric (input) and W1 (output).
    fn lipschitz(&self) -> f64;

    /// `(M, D)`.
    fn output_shape(&self) -> (usize, usize);

    fn modulus(&self) -> ModulusOfContinuity {
        ModulusOfContinuity::linear(self.lipschitz())
    }
}

/// Landmarks `(μᵏ, xᵏ)` with packing radius `δ` and retraction radius `δ*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Packing {
    landmarks: Vec<ContextQuery>,
    delta: f64,
    delta_star: f64,
}

fn check_shapes(reference: &ContextQuery, p: &ContextQuery) -> Result<()> {
    let (a, b) = (&reference.context, &p.context);
    if a.context() != b.context() || a.len() != b.len() || a.dim() != b.dim() {
        return Err(Error::Config(format!(
            "context shapes differ: (C={}, N={}, d={}) vs (C={}, N={}, d={})",
            a.context(),
            a.len(),
            a.dim(),
            b.context(),
            b.len(),
            b.dim()
        )));
    }
    Ok(())
}

fn check_radii(delta: f64, delta_star: f64) -> Result<()> {
    if !(delta_star > 0.0 && delta_star < delta && delta.is_finite()) {
        return Err(Error::Config(format!(
            "radii need 0 < δ* < δ, got δ = {delta}, δ* = {delta_star}"
        )));
    }
    Ok(())
}

impl Packing {
    /// Validates radii, shapes and the pairwise `δ` separation of the landmarks.
    pub fn new(landmarks: Vec<ContextQuery>, delta: f64, delta_star: f64) -> Result<Self> {
        check_radii(delta, delta_star)?;
        let Some(first) = landmarks.first() else {
            return Err(Error::Config(
                "a packing needs at least one landmark".into(),
            ));
        };
        for p in &landmarks {
            check_shapes(first, p)?;
        }
        for i in 0..landmarks.len() {
            for j in 0..i {
                let dist = pair_metric(&landmarks[i], &landmarks[j])?;
                if dist < delta {
                    return Err(Error::Config(format!(
                        "landmarks {j} and {i} are {dist} apart, closer than δ = {delta}"
                    )));
                }
            }
        }
        Ok(Packing {
            landmarks,
            delta,
            delta_star,
        })
    }

    pub fn landmarks(&self) -> &[ContextQuery] {
        &self.landmarks
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn delta_star(&self) -> f64 {
        self.delta_star
    }

    /// Number of landmarks `K`.
    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }

    /// Same landmarks with a different retraction radius.
    pub fn with_delta_star(&self, delta_star: f64) -> Result<Packing> {
        check_radii(self.delta, delta_star)?;
        Ok(Packing {
            delta_star,
            ..self.clone()
        })
    }

    /// Pair-metric distances from `p` to every landmark.
    pub fn distances(&self, p: &ContextQuery) -> Result<Vec<f64>> {
        self.landmarks.iter().map(|l| pair_metric(p, l)).collect()
    }

    /// Cell of `p` with retraction radius `retraction`, from its landmark distances.
    fn label_from(&self, distances: &[f64], retraction: f64) -> CellLabel {
        match distances.iter().position(|&d| d < self.delta) {
            Some(k) if distances[k] < retraction => CellLabel::Cell(k),
            _ => CellLabel::Trifling,
        }
    }
}

/// Farthest-point greedy δ-packing of `samples`.
///
/// Starts from sample 0 and repeatedly adds the sample farthest from the
/// chosen landmarks (lowest index on ties) while that distance is at least
/// `δ`. The result is a maximal δ-packing, hence a δ-net, of the samples.
pub fn greedy_packing(samples: &[ContextQuery], delta: f64, delta_star: f64) -> Result<Packing> {
    check_radii(delta, delta_star)?;
    let Some(first) = samples.first() else {
        return Err(Error::Config(
            "cannot build a packing from no samples".into(),
        ));
    };
    for p in samples {
        check_shapes(first, p)?;
    }
    let mut chosen = vec![0usize];
    let mut nearest: Vec<f64> = samples
        .iter()
        .map(|p| pair_metric(p, first))
        .collect::<Result<_>>()?;
    loop {
        let (best, &far) = nearest
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |acc, cur| {
                if cur.1 > acc.1 {
                    cur
                } else {
                    acc
                }
            });
        if far < delta {
            break;
        }
        chosen.push(best);
        for (d, p) in nearest.iter_mut().zip(samples) {
            *d = d.min(pair_metric(p, &samples[best])?);
        }
    }
    Ok(Packing {
        landmarks: chosen.into_iter().map(|i| samples[i].clone()).collect(),
        delta,
        delta_star,
    })
}

/// Cell membership of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellLabel {
    Cell(usize),
    Trifling,
}

impl CellLabel {
    pub fn cell(&self) -> Option<usize> {
        match self {
            CellLabel::Cell(k) => Some(*k),
            CellLabel::Trifling => None,
        }
    }
}

/// Labels of a sample list under a packing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellAssignment {
    pub labels: Vec<CellLabel>,
}

impl CellAssignment {
    pub fn trifling_count(&self) -> usize {
        self.labels
            .iter()
            .filter(|l| **l == CellLabel::Trifling)
            .count()
    }

    pub fn trifling_fraction(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.trifling_count() as f64 / self.labels.len() as f64
    }
}

/// Assigns every sample to its retracted Voronoi cell, or to the trifling region.
///
/// A sample belongs to cell `k` when it lies within `δ*` of landmark `k` and at
/// least `δ` away from every earlier landmark.
pub fn assign_cells(packing: &Packing, samples: &[ContextQuery]) -> Result<CellAssignment> {
    let labels = samples
        .iter()
        .map(|p| Ok(packing.label_from(&packing.distances(p)?, packing.delta_star)))
        .collect::<Result<_>>()?;
    Ok(CellAssignment { labels })
}

/// The piecewise-constant approximator on cells retracted by `δ` itself.
#[derive(Debug, Clone)]
pub struct PwcApproximator {
    packing: Packing,
    values: Vec<OutputMeasure>,
}

impl PwcApproximator {
    /// `ν_k = f(μᵏ, xᵏ)`, atoms in lexicographic order.
    pub fn values(&self) -> &[OutputMeasure] {
        &self.values
    }

    /// `ν_k` for the δ-cell `k` containing `p`; `None` when `p` is farther than `δ` from every landmark.
    pub fn eval(&self, p: &ContextQuery) -> Result<Option<&OutputMeasure>> {
        let d = self.packing.distances(p)?;
        Ok(self
            .packing
            .label_from(&d, self.packing.delta)
            .cell()
            .map(|k| &self.values[k]))
    }
}

pub fn pwc_approximator(packing: &Packing, f: &dyn TargetFunction) -> PwcApproximator {
    PwcApproximator {
        packing: packing.clone(),
        values: packing
            .landmarks
            .iter()
            .map(|l| f.eval(l).canonical())
            .collect(),
    }
}

/// One hidden layer assembled from pass-through neurons and products.
struct QuadLayer {
    input_dim: usize,
    entry: Vec<Vec<(usize, f64)>>,
    act: Vec<ActivationParams>,
}

impl QuadLayer {
    fn new(input_dim: usize) -> Self {
        QuadLayer {
            input_dim,
            entry: Vec::new(),
            act: Vec::new(),
        }
    }

    /// Hidden neuron copying input `i`.
    fn carry(&mut self, i: usize) -> usize {
        self.entry.push(vec![(i, 1.0)]);
        self.act.push(ActivationParams::IDENTITY);
        self.entry.len() - 1
    }

    /// Hidden combination equal to `x_a · x_b` (six ReQU neurons).
    fn product(&mut self, a: usize, b: usize) -> Vec<(usize, f64)> {
        let base = self.entry.len();
        for row in [
            vec![(a, 1.0), (b, 1.0)],
            vec![(a, -1.0), (b, -1.0)],
            vec![(a, 1.0)],
            vec![(a, -1.0)],
            vec![(b, 1.0)],
            vec![(b, -1.0)],
        ] {
            self.entry.push(row);
            self.act.push(ActivationParams::REQU);
        }
        [0.5, 0.5, -0.5, -0.5, -0.5, -0.5]
            .into_iter()
            .enumerate()
            .map(|(k, c)| (base + k, c))
            .collect()
    }

    fn finish(self, readout: Vec<Vec<(usize, f64)>>) -> CompiledNet {
        let h = self.entry.len();
        CompiledNet::new(vec![
            Layer::linear(SparseMatrix::from_rows(self.input_dim, self.entry)),
            Layer::new(SparseMatrix::from_rows(h, readout), vec![0.0; h], self.act)
                .expect("hidden layer dimensions"),
        ])
        .expect("stage dimensions")
    }
}

/// Stage computing `Φ_k = g_k·P` and `acc += r_k·Φ_k`.
///
/// State in: `[g_k, g_{k+1}.., P, acc]`; state out: `[g_{k+1}.., P, Φ_k, acc]`.
fn stage_indicator(remaining: usize, readout: &[f64]) -> CompiledNet {
    let r = readout.len();
    let p = remaining;
    let mut q = QuadLayer::new(remaining + 1 + r);
    let mut rows: Vec<Vec<(usize, f64)>> =
        (1..remaining).map(|i| vec![(q.carry(i), 1.0)]).collect();
    rows.push(vec![(q.carry(p), 1.0)]);
    let phi = q.product(0, p);
    rows.push(phi.clone());
    for (a, &coef) in readout.iter().enumerate() {
        let mut row = vec![(q.carry(p + 1 + a), 1.0)];
        row.extend(phi.iter().map(|&(h, c)| (h, c * coef)));
        rows.push(row);
    }
    q.finish(rows)
}

/// Stage computing `P ← P·(1 − Φ)`.
///
/// State in: `[g.., P, Φ, acc]`; state out: `[g.., P', acc]`.
fn stage_survival(remaining: usize, r: usize) -> CompiledNet {
    let p = remaining;
    let mut q = QuadLayer::new(remaining + 2 + r);
    let mut rows: Vec<Vec<(usize, f64)>> =
        (0..remaining).map(|i| vec![(q.carry(i), 1.0)]).collect();
    let mut next = vec![(q.carry(p), 1.0)];
    next.extend(q.product(p, p + 1).into_iter().map(|(h, c)| (h, -c)));
    rows.push(next);
    for a in 0..r {
        rows.push(vec![(q.carry(p + 2 + a), 1.0)]);
    }
    q.finish(rows)
}

/// Indicator chain over `readout.len()` stages, mapping `[g_0..g_{S-1}]` to `Σ_k readout[k]·Φ_k`.
fn indicator_chain(readout: &[Vec<f64>]) -> Result<CompiledNet> {
    let stages = readout.len();
    let r = readout[0].len();
    // [g] ↦ [g, P = 1, acc = 0]
    let mut init_rows: Vec<Vec<(usize, f64)>> = (0..stages).map(|i| vec![(i, 1.0)]).collect();
    init_rows.extend(std::iter::repeat_with(Vec::new).take(1 + r));
    let mut offset = vec![0.0; stages + 1 + r];
    offset[stages] = 1.0;
    let mut net = CompiledNet::affine(Affine::new(
        SparseMatrix::from_rows(stages, init_rows),
        offset,
    )?);
    for (k, col) in readout.iter().enumerate() {
        let remaining = stages - k;
        net = compose(&stage_indicator(remaining, col), &net)?;
        if k + 1 < stages {
            net = compose(&stage_survival(remaining - 1, r), &net)?;
        }
    }
    // final state [P, Φ_last, acc]
    let select = SparseMatrix::from_rows(2 + r, (0..r).map(|a| vec![(2 + a, 1.0)]).collect());
    after(&Affine::linear(select), &net)
}

/// Net mapping a context-query input to `g_k = φ(d_k)` for the first `count` landmarks.
fn bump_bank(packing: &Packing, count: usize, budget: &Budget) -> Result<CompiledNet> {
    let first = &packing.landmarks[0];
    let (c, n, d) = (
        first.context.context(),
        first.context.len(),
        first.context.dim(),
    );
    let block = n * (d + 1);
    let input_dim = block + d;
    let w1 = build_w1_contextual(c, n, d, budget)?;
    let context_part = Affine::linear(SparseMatrix::from_rows(
        input_dim,
        (0..block).map(|i| vec![(i, 1.0)]).collect(),
    ));
    let bump = build_bump(packing.delta_star, packing.delta, 1)?;
    let query_l1 = build_l1_norm_shallow(d)?;
    let query_select =
        SparseMatrix::from_rows(input_dim, (0..d).map(|i| vec![(block + i, 1.0)]).collect());

    let mut gates = Vec::with_capacity(count);
    for landmark in &packing.landmarks[..count] {
        let fixed: Vec<(usize, f64)> = landmark
            .context
            .token_block()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (block + i, v))
            .collect();
        let w1_to_landmark = before(&fix_inputs(&w1, &fixed)?, &context_part)?;
        let shift: Vec<f64> = landmark.query.iter().map(|v| -v).collect();
        let query_dist = before(&query_l1, &Affine::new(query_select.clone(), shift)?)?;
        let dist = after(&Affine::sum(2), &stack(&[w1_to_landmark, query_dist])?)?;
        gates.push(compose(&bump, &dist)?);
    }
    stack(&gates)
}

fn input_dim_of(packing: &Packing) -> usize {
    let m = &packing.landmarks[0].context;
    m.len() * (m.dim() + 1) + m.dim()
}

/// The indicator `Φ̃_k` of cell `k`, input `[token block of μ, x]`.
///
/// Equals the 0/1 membership of cell `k` at every point outside the trifling region.
pub fn build_indicator_net(packing: &Packing, k: usize, budget: &Budget) -> Result<CompiledNet> {
    if k >= packing.len() {
        return Err(Error::Config(format!(
            "cell index {k} out of range for K = {}",
            packing.len()
        )));
    }
    let readout: Vec<Vec<f64>> = (0..=k)
        .map(|j| vec![if j == k { 1.0 } else { 0.0 }])
        .collect();
    compose(
        &indicator_chain(&readout)?,
        &bump_bank(packing, k + 1, budget)?,
    )
}

/// All indicators `(Φ̃_0, …, Φ̃_{K−1})` in one net.
pub fn build_indicator_bank(packing: &Packing, budget: &Budget) -> Result<CompiledNet> {
    let k = packing.len();
    let readout: Vec<Vec<f64>> = (0..k)
        .map(|j| (0..k).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    compose(&indicator_chain(&readout)?, &bump_bank(packing, k, budget)?)
}

/// The compiled in-context approximator `Σ_k ν_k Φ̃_k`.
#[derive(Debug, Clone)]
pub struct Approximator {
    /// Outputs `[ν atoms (M·D), Φ̃_0, …, Φ̃_{K−1}]`.
    full: CompiledNet,
    values: Vec<OutputMeasure>,
    m: usize,
    dim: usize,
}

impl Approximator {
    /// The approximator as a single net with output block `M × D` (row-major).
    pub fn net(&self) -> Result<CompiledNet> {
        let out = self.m * self.dim;
        let select = SparseMatrix::from_rows(
            self.full.output_dim(),
            (0..out).map(|i| vec![(i, 1.0)]).collect(),
        );
        after(&Affine::linear(select), &self.full)
    }

    /// Net with outputs `[atoms (M·D), Φ̃_0, …, Φ̃_{K−1}]`.
    pub fn full_net(&self) -> &CompiledNet {
        &self.full
    }

    pub fn values(&self) -> &[OutputMeasure] {
        &self.values
    }

    pub fn output_shape(&self) -> (usize, usize) {
        (self.m, self.dim)
    }

    /// Predicted atom block and indicator values at `p`.
    pub fn eval_parts(&self, p: &ContextQuery) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut out = self.full.eval(&p.network_input())?;
        let phis = out.split_off(self.m * self.dim);
        Ok((out, phis))
    }

    /// The signed mixture `Σ_k Φ̃_k ν_k` at `p` (equal to `ν_k` inside cell `k`).
    pub fn eval_mixture(&self, p: &ContextQuery) -> Result<SignedDiscreteMeasure> {
        let (_, phis) = self.eval_parts(p)?;
        Ok(SignedDiscreteMeasure::from_pairs(
            phis.iter()
                .zip(&self.values)
                .filter(|(phi, _)| **phi != 0.0)
                .flat_map(|(&phi, nu)| nu.weighted_atoms(phi)),
        ))
    }
}

/// Compiles `f̂_δ = Σ_k ν_k Φ̃_k` for the given packing and target.
pub fn build_approximator(
    packing: &Packing,
    f: &dyn TargetFunction,
    budget: &Budget,
) -> Result<Approximator> {
    let (m, dim) = f.output_shape();
    let values: Vec<OutputMeasure> = packing
        .landmarks
        .iter()
        .map(|l| f.eval(l).canonical())
        .collect();
    for v in &values {
        check_dim(m, v.len())?;
        check_dim(dim, v.dim())?;
    }
    let k = packing.len();
    let readout: Vec<Vec<f64>> = values
        .iter()
        .enumerate()
        .map(|(j, nu)| {
            let mut col = nu.flat();
            col.extend((0..k).map(|i| if i == j { 1.0 } else { 0.0 }));
            col
        })
        .collect();
    let full = compose(&indicator_chain(&readout)?, &bump_bank(packing, k, budget)?)?;
    debug_assert_eq!(full.input_dim(), input_dim_of(packing));
    Ok(Approximator {
        full,
        values,
        m,
        dim,
    })
}

/// Empirical error and region statistics of an approximator on a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub delta: f64,
    pub delta_star: f64,
    pub k: usize,
    pub trifling_fraction: f64,
    /// `sup W1(f, f̂)` over samples in the approximation region (0 if there are none).
    pub sup_err_approx_region: f64,
    /// `(n⁻¹ Σ_{trifling} ‖f − f̂‖_KR^p)^{1/p}` over all `n` samples.
    pub tail_moment_p: f64,
    /// `ω(δ)`.
    pub bound_omega_delta: f64,
    /// `K·(δ^q − δ*^q)`, the trifling-mass bound with unit constant.
    pub bound_trifling: f64,
    /// `δ^q − δ*^q`, the same bound without the factor `K`.
    pub bound_trifling_no_k: f64,
    /// `(ω(δ) + 1)·(δ^q − δ*^q)^{1/p}`, the tail-moment bound with unit constant.
    pub bound_tail_moment: f64,
}

/// Evaluates trifling mass, uniform error and tail moment of `approx` on `samples`.
pub fn region_statistics(
    packing: &Packing,
    samples: &[ContextQuery],
    f: &dyn TargetFunction,
    approx: &Approximator,
    p: f64,
    q: f64,
) -> Result<RegionReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Config(format!(
            "moment order must be in [1, ∞), got {p}"
        )));
    }
    let assignment = assign_cells(packing, samples)?;
    let (m, dim) = approx.output_shape();
    let mut sup = 0.0f64;
    let mut tail = 0.0f64;
    for (sample, label) in samples.iter().zip(&assignment.labels) {
        let target = f.eval(sample);
        match label {
            CellLabel::Cell(_) => {
                let (atoms, _) = approx.eval_parts(sample)?;
                let predicted = OutputMeasure::from_flat(&atoms, m, dim)?;
                sup = sup.max(w1_output(&target, &predicted)?);
            }
            CellLabel::Trifling => {
                let mixture = approx.eval_mixture(sample)?;
                let diff = SignedDiscreteMeasure::from_pairs(
                    target.weighted_atoms(1.0).chain(
                        mixture
                            .atoms()
                            .iter()
                            .cloned()
                            .zip(mixture.masses().iter().map(|m| -m)),
                    ),
                );
                tail += kr_norm(&diff).powf(p);
            }
        }
    }
    let n = samples.len().max(1) as f64;
    let (delta, delta_star) = (packing.delta, packing.delta_star);
    let omega = f.modulus().at(delta);
    let shell = delta.powf(q) - delta_star.powf(q);
    Ok(RegionReport {
        delta,
        delta_star,
        k: packing.len(),
        trifling_fraction: assignment.trifling_fraction(),
        sup_err_approx_region: sup,
        tail_moment_p: (tail / n).powf(1.0 / p),
        bound_omega_delta: omega,
        bound_trifling: packing.len() as f64 * shell,
        bound_trifling_no_k: shell,
        bound_tail_moment: (omega + 1.0) * shell.powf(1.0 / p),
    })
}
