//! Layered networks with the trainable activation, and exact gadgets.
//!
//! A [`Layer`] maps `x ↦ W·σ(x + b)` where `σ` is applied neuron-wise with its
//! own [`ActivationParams`]. A [`CompiledNet`] is a non-empty list of layers;
//! its depth is `layers.len() − 1`. Gadgets use an identity-activated first
//! layer, so the first layer is a plain linear entry map and each further
//! layer contributes one hidden layer. There is no output bias: constant
//! offsets are carried by a hidden "constant neuron" (bias 1, identity
//! activation, no incoming weights) or folded into the next layer's bias.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::sparse::SparseMatrix;

/// Inputs to ReQU neurons are expected to stay below this magnitude (checked in debug builds).
pub const REQU_RANGE: f64 = 1e6;

/// `σ_θ(x) = α1·x^p` for `x ≥ 0`, `α2·x` for `x < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ActivationParams {
    pub alpha1: f64,
    pub p: f64,
    pub alpha2: f64,
}

impl ActivationParams {
    pub const IDENTITY: ActivationParams = ActivationParams {
        alpha1: 1.0,
        p: 1.0,
        alpha2: 1.0,
    };
    pub const RELU: ActivationParams = ActivationParams {
        alpha1: 1.0,
        p: 1.0,
        alpha2: 0.0,
    };
    pub const REQU: ActivationParams = ActivationParams {
        alpha1: 1.0,
        p: 2.0,
        alpha2: 0.0,
    };

    pub fn new(alpha1: f64, p: f64, alpha2: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Config(format!(
                "activation exponent must be positive, got {p}"
            )));
        }
        if !alpha1.is_finite() || !alpha2.is_finite() {
            return Err(Error::Config(
                "activation coefficients must be finite".into(),
            ));
        }
        Ok(ActivationParams { alpha1, p, alpha2 })
    }

    pub fn apply(&self, x: f64) -> f64 {
        if x >= 0.0 {
            let pow = if self.p == 1.0 {
                x
            } else if self.p == 2.0 {
                debug_assert!(x <= REQU_RANGE, "ReQU input {x} out of range");
                x * x
            } else {
                x.powf(self.p)
            };
            self.alpha1 * pow
        } else {
            self.alpha2 * x
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }
}

impl TryFrom<[f64; 3]> for ActivationParams {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        ActivationParams::new(v[0], v[1], v[2])
    }
}

impl From<ActivationParams> for [f64; 3] {
    fn from(a: ActivationParams) -> Self {
        [a.alpha1, a.p, a.alpha2]
    }
}

/// One step `x ↦ W·σ(x + b)` with per-input-neuron activations.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: SparseMatrix,
    pub bias: Vec<f64>,
    pub act: Vec<ActivationParams>,
}

impl Layer {
    pub fn new(weight: SparseMatrix, bias: Vec<f64>, act: Vec<ActivationParams>) -> Result<Self> {
        check_dim(weight.cols(), bias.len())?;
        check_dim(weight.cols(), act.len())?;
        Ok(Layer { weight, bias, act })
    }

    /// A purely linear layer (identity activations, zero bias).
    pub fn linear(weight: SparseMatrix) -> Self {
        let n = weight.cols();
        Layer {
            weight,
            bias: vec![0.0; n],
            act: vec![ActivationParams::IDENTITY; n],
        }
    }

    /// A layer whose neurons all share one activation and have zero bias.
    pub fn uniform(weight: SparseMatrix, act: ActivationParams) -> Self {
        let n = weight.cols();
        Layer {
            weight,
            bias: vec![0.0; n],
            act: vec![act; n],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.bias.len()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    /// True when the layer is an affine map (every activation is the identity).
    pub fn is_affine(&self) -> bool {
        self.act.iter().all(ActivationParams::is_identity)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = x
            .iter()
            .zip(&self.bias)
            .zip(&self.act)
            .map(|((&xi, &b), a)| a.apply(xi + b))
            .collect();
        self.weight.matvec(&z)
    }

    fn nnz(&self) -> usize {
        self.weight.nnz() + self.bias.iter().filter(|&&b| b != 0.0).count()
    }

    /// Appends a hidden neuron that always outputs 1 and feeds `column` into the outputs.
    fn push_constant_neuron(&mut self, column: &[f64]) {
        self.bias.push(1.0);
        self.act.push(ActivationParams::IDENTITY);
        self.weight.push_col(column);
    }
}

/// Size accounting of a compiled network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetMeta {
    pub depth: usize,
    pub width: usize,
    pub nnz: usize,
}

/// A layered network; see the module docs for the conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledNet {
    layers: Vec<Layer>,
    /// Optional tag describing what the network computes (e.g. `"w1_uniform"`).
    pub role: Option<String>,
    /// Free-form construction parameters stored alongside the role.
    pub params: Option<serde_json::Value>,
}

impl CompiledNet {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("a network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            check_dim(pair[0].out_dim(), pair[1].in_dim())?;
        }
        Ok(CompiledNet {
            layers,
            role: None,
            params: None,
        })
    }

    fn from_layers(layers: Vec<Layer>) -> Self {
        debug_assert!(!layers.is_empty());
        debug_assert!(layers.windows(2).all(|p| p[0].out_dim() == p[1].in_dim()));
        CompiledNet {
            layers,
            role: None,
            params: None,
        }
    }

    pub fn with_role(mut self, role: &str, params: serde_json::Value) -> Self {
        self.role = Some(role.to_string());
        self.params = Some(params);
        self
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Largest hidden dimension (0 for a purely affine net).
    pub fn width(&self) -> usize {
        self.layers[1..]
            .iter()
            .map(Layer::in_dim)
            .max()
            .unwrap_or(0)
    }

    /// Nonzero entries across all weights and biases.
    pub fn nnz(&self) -> usize {
        self.layers.iter().map(Layer::nnz).sum()
    }

    pub fn meta(&self) -> NetMeta {
        NetMeta {
            depth: self.depth(),
            width: self.width(),
            nnz: self.nnz(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.input_dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut v = self.layers[0].apply(x);
        for layer in &self.layers[1..] {
            v = layer.apply(&v);
        }
        v
    }

    /// Single-output convenience wrapper around [`CompiledNet::eval`].
    pub fn eval_scalar(&self, x: &[f64]) -> Result<f64> {
        let out = self.eval(x)?;
        check_dim(1, out.len())?;
        Ok(out[0])
    }

    /// The affine map `x ↦ Wx + c` as a network (depth 0, or depth 1 when `c` is outside the reach of a bias-free readout).
    pub fn affine(map: Affine) -> Self {
        let net = CompiledNet::from_layers(vec![Layer::linear(map.weight)]);
        net.add_output_offset(&map.offset)
    }

    /// The identity map on `ℝ^n`.
    pub fn identity(n: usize) -> Self {
        CompiledNet::from_layers(vec![Layer::linear(SparseMatrix::identity(n))])
    }

    /// Returns a net computing `self(x) + offset`.
    pub fn add_output_offset(mut self, offset: &[f64]) -> Self {
        debug_assert_eq!(offset.len(), self.output_dim());
        if offset.iter().all(|&c| c == 0.0) {
            return self;
        }
        self.role = None;
        if self.depth() >= 1 {
            let l = self.layers.len() - 1;
            self.layers[l - 1].weight.push_row(Vec::new());
            self.layers[l].push_constant_neuron(offset);
            return self;
        }
        let m = self.output_dim();
        let mut first = self.layers.pop().unwrap();
        first.weight.push_row(Vec::new());
        let mut readout = Layer::linear(SparseMatrix::identity(m));
        readout.push_constant_neuron(offset);
        CompiledNet::from_layers(vec![first, readout])
    }

    /// Appends an identity-activated pass-through layer (depth + 1).
    fn push_identity_layer(&mut self) {
        let m = self.output_dim();
        self.layers.push(Layer::linear(SparseMatrix::identity(m)));
    }
}

/// An affine map `x ↦ Wx + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub weight: SparseMatrix,
    pub offset: Vec<f64>,
}

impl Affine {
    pub fn new(weight: SparseMatrix, offset: Vec<f64>) -> Result<Self> {
        check_dim(weight.rows(), offset.len())?;
        Ok(Affine { weight, offset })
    }

    pub fn linear(weight: SparseMatrix) -> Self {
        let m = weight.rows();
        Affine {
            weight,
            offset: vec![0.0; m],
        }
    }

    /// `x ↦ Σ x_i`.
    pub fn sum(n: usize) -> Self {
        Affine::linear(SparseMatrix::from_rows(
            n,
            vec![(0..n).map(|j| (j, 1.0)).collect()],
        ))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.weight.matvec(x);
        for (v, c) in y.iter_mut().zip(&self.offset) {
            *v += c;
        }
        y
    }
}

/// Evaluates `net` on `x`.
pub fn eval(net: &CompiledNet, x: &[f64]) -> Result<Vec<f64>> {
    net.eval(x)
}

/// `x ↦ map(net(x))`.
pub fn after(map: &Affine, net: &CompiledNet) -> Result<CompiledNet> {
    check_dim(net.output_dim(), map.weight.cols())?;
    let mut out = net.clone();
    out.role = None;
    out.params = None;
    let last = out.layers.last_mut().unwrap();
    last.weight = map.weight.matmul(&last.weight);
    Ok(out.add_output_offset(&map.offset))
}

/// `x ↦ net(map(x))`.
pub fn before(net: &CompiledNet, map: &Affine) -> Result<CompiledNet> {
    check_dim(net.input_dim(), map.weight.rows())?;
    let mut layers = net.layers.clone();
    let first = &layers[0];
    if first.is_affine() {
        // W0·(Ax + c + b0) = (W0·A)x + W0·(c + b0)
        let shifted: Vec<f64> = map
            .offset
            .iter()
            .zip(&first.bias)
            .map(|(c, b)| c + b)
            .collect();
        let constant = first.weight.matvec(&shifted);
        layers[0] = Layer::linear(first.weight.matmul(&map.weight));
        if layers.len() > 1 {
            for (b, k) in layers[1].bias.iter_mut().zip(&constant) {
                *b += k;
            }
            Ok(CompiledNet::from_layers(layers))
        } else {
            Ok(CompiledNet::from_layers(layers).add_output_offset(&constant))
        }
    } else {
        for (b, c) in layers[0].bias.iter_mut().zip(&map.offset) {
            *b += c;
        }
        layers.insert(0, Layer::linear(map.weight.clone()));
        Ok(CompiledNet::from_layers(layers))
    }
}

/// `x ↦ outer(inner(x))`, merging the affine maps that meet at the seam.
///
/// When `outer` starts with an affine layer the depth of the result is
/// `depth(inner) + depth(outer)`; otherwise the layers are stacked and the
/// depth grows by one.
pub fn compose(outer: &CompiledNet, inner: &CompiledNet) -> Result<CompiledNet> {
    check_dim(outer.input_dim(), inner.output_dim())?;
    let head = &outer.layers[0];
    if !head.is_affine() {
        let mut layers = inner.layers.clone();
        layers.extend(outer.layers.iter().cloned());
        return Ok(CompiledNet::from_layers(layers));
    }
    let constant = head.weight.matvec(&head.bias);
    if outer.depth() == 0 {
        return after(
            &Affine {
                weight: head.weight.clone(),
                offset: constant,
            },
            inner,
        );
    }
    let mut layers = inner.layers.clone();
    let last = layers.last_mut().unwrap();
    last.weight = head.weight.matmul(&last.weight);
    let mut next = outer.layers[1].clone();
    for (b, k) in next.bias.iter_mut().zip(&constant) {
        *b += k;
    }
    layers.push(next);
    layers.extend(outer.layers[2..].iter().cloned());
    Ok(CompiledNet::from_layers(layers))
}

/// Removes the listed inputs by fixing them to constants.
///
/// `fixed` holds `(input index, value)` pairs; remaining inputs keep their order.
pub fn fix_inputs(net: &CompiledNet, fixed: &[(usize, f64)]) -> Result<CompiledNet> {
    let n = net.input_dim();
    let mut value = vec![None; n];
    for &(i, v) in fixed {
        if i >= n {
            return Err(Error::Dimension {
                expected: n,
                got: i + 1,
            });
        }
        value[i] = Some(v);
    }
    let first = &net.layers[0];
    let mut constant = vec![0.0; first.out_dim()];
    let mut keep = Vec::new();
    for (i, v) in value.iter().enumerate() {
        match v {
            Some(v) => {
                let s = first.act[i].apply(v + first.bias[i]);
                if s != 0.0 {
                    for (k, c) in constant.iter_mut().enumerate() {
                        *c += first.weight.get(k, i) * s;
                    }
                }
            }
            None => keep.push(i),
        }
    }
    let mut layers = net.layers.clone();
    layers[0] = Layer {
        weight: first.weight.select_cols(&keep),
        bias: keep.iter().map(|&i| first.bias[i]).collect(),
        act: keep.iter().map(|&i| first.act[i]).collect(),
    };
    if layers.len() > 1 {
        for (b, k) in layers[1].bias.iter_mut().zip(&constant) {
            *b += k;
        }
        Ok(CompiledNet::from_layers(layers))
    } else {
        Ok(CompiledNet::from_layers(layers).add_output_offset(&constant))
    }
}

/// Block-diagonal combination of nets run side by side in the same layers.
///
/// Shallower nets are padded with identity-activated pass-through layers, so
/// the depth is the maximum member depth and the width is the sum of member
/// widths at each layer.
pub fn parallelize_shallow(nets: &[CompiledNet]) -> Result<CompiledNet> {
    if nets.is_empty() {
        return Err(Error::Config(
            "cannot parallelize an empty list of networks".into(),
        ));
    }
    if nets.len() == 1 {
        return Ok(nets[0].clone());
    }
    let depth = nets.iter().map(CompiledNet::depth).max().unwrap();
    let padded: Vec<CompiledNet> = nets
        .iter()
        .map(|net| {
            let mut net = net.clone();
            while net.depth() < depth {
                net.push_identity_layer();
            }
            net
        })
        .collect();
    let layers = (0..=depth)
        .map(|j| {
            let blocks: Vec<&SparseMatrix> = padded.iter().map(|n| &n.layers[j].weight).collect();
            Layer {
                weight: SparseMatrix::block_diag(&blocks),
                bias: padded
                    .iter()
                    .flat_map(|n| n.layers[j].bias.iter().copied())
                    .collect(),
                act: padded
                    .iter()
                    .flat_map(|n| n.layers[j].act.iter().copied())
                    .collect(),
            }
        })
        .collect();
    Ok(CompiledNet::from_layers(layers))
}

/// Concatenation `⊕_i Φ_i(x_i)` on concatenated inputs, one member at a time.
///
/// Member `i` runs while the outputs of earlier members and the inputs of
/// later members pass through identity-activated neurons. The depth is the
/// sum of member depths and the width is at most the carried dimension plus
/// the widest member.
pub fn parallelize(nets: &[CompiledNet]) -> Result<CompiledNet> {
    if nets.is_empty() {
        return Err(Error::Config(
            "cannot parallelize an empty list of networks".into(),
        ));
    }
    let mut current: Option<CompiledNet> = None;
    for i in 0..nets.len() {
        let done: usize = nets[..i].iter().map(CompiledNet::output_dim).sum();
        let pending: usize = nets[i + 1..].iter().map(CompiledNet::input_dim).sum();
        let mut parts = Vec::with_capacity(3);
        if done > 0 {
            parts.push(CompiledNet::identity(done));
        }
        parts.push(nets[i].clone());
        if pending > 0 {
            parts.push(CompiledNet::identity(pending));
        }
        let stage = parallelize_shallow(&parts)?;
        current = Some(match current {
            None => stage,
            Some(prev) => compose(&stage, &prev)?,
        });
    }
    Ok(current.unwrap())
}

/// Runs several nets on one shared input and concatenates their outputs.
pub fn stack(nets: &[CompiledNet]) -> Result<CompiledNet> {
    let Some(first) = nets.first() else {
        return Err(Error::Config(
            "cannot stack an empty list of networks".into(),
        ));
    };
    let n = first.input_dim();
    for net in nets {
        check_dim(n, net.input_dim())?;
    }
    let joint = parallelize_shallow(nets)?;
    let eye = SparseMatrix::identity(n);
    let copies: Vec<&SparseMatrix> = vec![&eye; nets.len()];
    before(&joint, &Affine::linear(SparseMatrix::vstack(&copies)))
}

fn one_hidden(
    entry: SparseMatrix,
    bias: Vec<f64>,
    act: Vec<ActivationParams>,
    readout: SparseMatrix,
) -> CompiledNet {
    CompiledNet::from_layers(vec![
        Layer::linear(entry),
        Layer::new(readout, bias, act).expect("gadget layer dimensions"),
    ])
}

/// `|x| = ReLU(x) + ReLU(−x)`: depth 1, width 2.
pub fn build_abs() -> CompiledNet {
    one_hidden(
        SparseMatrix::from_rows(1, vec![vec![(0, 1.0)], vec![(0, -1.0)]]),
        vec![0.0; 2],
        vec![ActivationParams::RELU; 2],
        SparseMatrix::from_rows(2, vec![vec![(0, 1.0), (1, 1.0)]]),
    )
}

/// `‖x‖₁` on `ℝ^F` as the sequential parallelization of `F` absolute values: depth `F`.
pub fn build_l1_norm(f: usize) -> Result<CompiledNet> {
    if f == 0 {
        return Err(Error::Config("ℓ1 gadget needs F ≥ 1".into()));
    }
    let abs = vec![build_abs(); f];
    after(&Affine::sum(f), &parallelize(&abs)?)
}

fn plus_minus(f: usize) -> SparseMatrix {
    let rows = (0..f)
        .map(|i| vec![(i, 1.0)])
        .chain((0..f).map(|i| vec![(i, -1.0)]))
        .collect();
    SparseMatrix::from_rows(f, rows)
}

/// `‖x‖₁` on `ℝ^F` with all absolute values in a single hidden layer: depth 1, width `2F`.
pub fn build_l1_norm_shallow(f: usize) -> Result<CompiledNet> {
    if f == 0 {
        return Err(Error::Config("ℓ1 gadget needs F ≥ 1".into()));
    }
    Ok(one_hidden(
        plus_minus(f),
        vec![0.0; 2 * f],
        vec![ActivationParams::RELU; 2 * f],
        SparseMatrix::from_rows(2 * f, vec![(0..2 * f).map(|j| (j, 1.0)).collect()]),
    ))
}

/// `‖x‖₂²` on `ℝ^F` as `Σ ReQU(x_i) + ReQU(−x_i)`: depth 1, width `2F`.
pub fn build_sq_l2_norm(f: usize) -> Result<CompiledNet> {
    if f == 0 {
        return Err(Error::Config("ℓ2² gadget needs F ≥ 1".into()));
    }
    Ok(one_hidden(
        plus_minus(f),
        vec![0.0; 2 * f],
        vec![ActivationParams::REQU; 2 * f],
        SparseMatrix::from_rows(2 * f, vec![(0..2 * f).map(|j| (j, 1.0)).collect()]),
    ))
}

/// Hidden neurons and readout for `x·y = ((x+y)² − x² − y²)/2`, each square from a ReQU pair.
fn product_neurons(
    x: usize,
    y: usize,
    entry: &mut Vec<Vec<(usize, f64)>>,
    readout: &mut Vec<(usize, f64)>,
) {
    let base = entry.len();
    entry.push(vec![(x, 1.0), (y, 1.0)]);
    entry.push(vec![(x, -1.0), (y, -1.0)]);
    entry.push(vec![(x, 1.0)]);
    entry.push(vec![(x, -1.0)]);
    entry.push(vec![(y, 1.0)]);
    entry.push(vec![(y, -1.0)]);
    for (k, c) in [0.5, 0.5, -0.5, -0.5, -0.5, -0.5].into_iter().enumerate() {
        readout.push((base + k, c));
    }
}

/// Componentwise products `(x_i·y_i)` on input `(x, y) ∈ ℝ^{2m}`: depth 1, width `6m`.
pub fn build_mult(m: usize) -> Result<CompiledNet> {
    if m == 0 {
        return Err(Error::Config("multiplication gadget needs m ≥ 1".into()));
    }
    let mut entry = Vec::with_capacity(6 * m);
    let mut readout = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::new();
        product_neurons(i, m + i, &mut entry, &mut row);
        readout.push(row);
    }
    let h = entry.len();
    Ok(one_hidden(
        SparseMatrix::from_rows(2 * m, entry),
        vec![0.0; h],
        vec![ActivationParams::REQU; h],
        SparseMatrix::from_rows(h, readout),
    ))
}

/// `⟨u, v⟩` on input `(u, v) ∈ ℝ^{2n}`: depth 1, width `6n`.
pub fn build_inner_product(n: usize) -> Result<CompiledNet> {
    after(&Affine::sum(n), &build_mult(n)?)
}

/// One level of a pairwise reduction tree over `k` inputs; an odd last input passes through.
fn tree_level(k: usize, pair: impl Fn(usize, usize, &mut TreeRows)) -> CompiledNet {
    let mut rows = TreeRows::default();
    for i in 0..k / 2 {
        pair(2 * i, 2 * i + 1, &mut rows);
        let readout = std::mem::take(&mut rows.scratch);
        rows.readout.push(readout);
    }
    if k % 2 == 1 {
        let n = rows.entry.len();
        rows.entry.push(vec![(k - 1, 1.0)]);
        rows.act.push(ActivationParams::IDENTITY);
        rows.readout.push(vec![(n, 1.0)]);
    }
    let h = rows.entry.len();
    one_hidden(
        SparseMatrix::from_rows(k, rows.entry),
        vec![0.0; h],
        rows.act,
        SparseMatrix::from_rows(h, rows.readout),
    )
}

#[derive(Default)]
struct TreeRows {
    entry: Vec<Vec<(usize, f64)>>,
    act: Vec<ActivationParams>,
    readout: Vec<Vec<(usize, f64)>>,
    scratch: Vec<(usize, f64)>,
}

fn reduction_tree(k: usize, pair: impl Fn(usize, usize, &mut TreeRows) + Copy) -> CompiledNet {
    let mut net = CompiledNet::identity(k);
    let mut width = k;
    while width > 1 {
        let level = tree_level(width, pair);
        net = compose(&level, &net).expect("tree levels chain");
        width = width.div_ceil(2);
    }
    net
}

/// `min(x_1, …, x_K)` from a left-leaning tree of `min(a,b) = ½(a + b − |a − b|)`: depth `⌈log₂K⌉`.
pub fn build_min(k: usize) -> Result<CompiledNet> {
    if k == 0 {
        return Err(Error::Config("min gadget needs K ≥ 1".into()));
    }
    Ok(reduction_tree(k, |a, b, rows| {
        let n = rows.entry.len();
        rows.entry.push(vec![(a, 1.0)]);
        rows.entry.push(vec![(b, 1.0)]);
        rows.entry.push(vec![(a, 1.0), (b, -1.0)]);
        rows.entry.push(vec![(a, -1.0), (b, 1.0)]);
        rows.act.extend([
            ActivationParams::IDENTITY,
            ActivationParams::IDENTITY,
            ActivationParams::RELU,
            ActivationParams::RELU,
        ]);
        rows.scratch
            .extend([(n, 0.5), (n + 1, 0.5), (n + 2, -0.5), (n + 3, -0.5)]);
    }))
}

/// `Π x_i` over `k` inputs from a tree of multiplication gadgets: depth `⌈log₂k⌉`.
pub fn build_product(k: usize) -> Result<CompiledNet> {
    if k == 0 {
        return Err(Error::Config("product gadget needs k ≥ 1".into()));
    }
    Ok(reduction_tree(k, |a, b, rows| {
        let mut readout = Vec::new();
        product_neurons(a, b, &mut rows.entry, &mut readout);
        rows.act.extend([ActivationParams::REQU; 6]);
        rows.scratch.extend(readout);
    }))
}

/// Ramp equal to 1 on `(−∞, 0]`, 0 on `[1/(2C), ∞)` and linear between: depth 1, width 2.
pub fn build_threshold(c: u32) -> Result<CompiledNet> {
    if c == 0 {
        return Err(Error::Config("threshold gadget needs C ≥ 1".into()));
    }
    let slope = 2.0 * c as f64;
    Ok(one_hidden(
        SparseMatrix::from_rows(1, vec![vec![(0, -1.0)], vec![(0, -1.0)]]),
        vec![1.0 / slope, 0.0],
        vec![ActivationParams::RELU; 2],
        SparseMatrix::from_rows(2, vec![vec![(0, slope), (1, -slope)]]),
    ))
}

fn check_radii(delta_star: f64, delta: f64) -> Result<()> {
    if !(delta_star > 0.0 && delta_star < delta && delta.is_finite()) {
        return Err(Error::Config(format!(
            "bump radii need 0 < δ* < δ, got δ* = {delta_star}, δ = {delta}"
        )));
    }
    Ok(())
}

/// Scalar bump: 1 on `[−δ*, δ*]`, 0 outside `(−δ, δ)`, linear between. Depth 2, width 2.
pub fn build_scalar_bump(delta_star: f64, delta: f64) -> Result<CompiledNet> {
    check_radii(delta_star, delta)?;
    let scale = 1.0 / (delta - delta_star);
    Ok(CompiledNet::from_layers(vec![
        Layer::linear(SparseMatrix::from_rows(
            1,
            vec![vec![(0, 1.0)], vec![(0, -1.0)]],
        )),
        // both hidden neurons compute −|t|
        Layer::uniform(
            SparseMatrix::from_rows(2, vec![vec![(0, -1.0), (1, -1.0)]; 2]),
            ActivationParams::RELU,
        ),
        Layer::new(
            SparseMatrix::from_rows(2, vec![vec![(0, scale), (1, -scale)]]),
            vec![delta, delta_star],
            vec![ActivationParams::RELU; 2],
        )?,
    ]))
}

/// Product over coordinates of the scalar bump, on `ℝ^d`.
pub fn build_bump(delta_star: f64, delta: f64, d: usize) -> Result<CompiledNet> {
    if d == 0 {
        return Err(Error::Config("bump gadget needs d ≥ 1".into()));
    }
    let scalar = build_scalar_bump(delta_star, delta)?;
    let coords = parallelize_shallow(&vec![scalar; d])?;
    compose(&build_product(d)?, &coords)
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    weight: Vec<Vec<f64>>,
    bias: Vec<f64>,
    act: Vec<ActivationParams>,
}

#[derive(Serialize, Deserialize)]
struct NetJson {
    layers: Vec<LayerJson>,
    #[serde(default)]
    meta: Option<NetMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    role: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<serde_json::Value>,
}

impl Serialize for CompiledNet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NetJson {
            layers: self
                .layers
                .iter()
                .map(|l| LayerJson {
                    weight: l.weight.to_dense(),
                    bias: l.bias.clone(),
                    act: l.act.clone(),
                })
                .collect(),
            meta: Some(self.meta()),
            role: self.role.clone(),
            params: self.params.clone(),
        }
        .serialize(s)
    }
}

impl TryFrom<NetJson> for CompiledNet {
    type Error = Error;
    fn try_from(raw: NetJson) -> Result<Self> {
        let layers = raw
            .layers
            .into_iter()
            .map(|l| {
                Layer::new(
                    SparseMatrix::from_dense(l.bias.len(), &l.weight)?,
                    l.bias,
                    l.act,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let mut net = CompiledNet::new(layers)?;
        if let Some(meta) = raw.meta {
            if meta != net.meta() {
                return Err(Error::Malformed(format!(
                    "recorded meta {meta:?} disagrees with the layers ({:?})",
                    net.meta()
                )));
            }
        }
        net.role = raw.role;
        net.params = raw.params;
        Ok(net)
    }
}

impl<'de> Deserialize<'de> for CompiledNet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CompiledNet::try_from(NetJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(net: &CompiledNet, x: &[f64]) -> f64 {
        net.eval_scalar(x).unwrap()
    }

    fn single_neuron(act: ActivationParams) -> CompiledNet {
        CompiledNet::new(vec![
            Layer::linear(SparseMatrix::identity(1)),
            Layer::uniform(SparseMatrix::identity(1), act),
        ])
        .unwrap()
    }

    #[test]
    fn activation_configurations() {
        assert_eq!(scalar(&single_neuron(ActivationParams::RELU), &[-3.0]), 0.0);
        assert_eq!(scalar(&single_neuron(ActivationParams::REQU), &[3.0]), 9.0);
        assert_eq!(
            scalar(&single_neuron(ActivationParams::IDENTITY), &[-2.5]),
            -2.5
        );
        let id = CompiledNet::identity(3);
        assert_eq!(id.eval(&[1.0, -2.0, 0.5]).unwrap(), vec![1.0, -2.0, 0.5]);
        assert!(ActivationParams::new(1.0, 0.0, 0.0).is_err());
        assert!(ActivationParams::new(1.0, -1.0, 0.0).is_err());
        let half = ActivationParams::new(2.0, 0.5, -1.0).unwrap();
        assert!((half.apply(4.0) - 4.0).abs() < 1e-15);
        assert_eq!(half.apply(-2.0), 2.0);
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        assert!(matches!(
            build_abs().eval(&[1.0, 2.0]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn abs_examples_and_size() {
        let abs = build_abs();
        for (x, y) in [(-5.0, 5.0), (0.0, 0.0), (7.0, 7.0)] {
            assert_eq!(scalar(&abs, &[x]), y);
        }
        assert_eq!((abs.depth(), abs.width()), (1, 2));
    }

    #[test]
    fn l1_examples_and_size() {
        let net = build_l1_norm(3).unwrap();
        assert_eq!(scalar(&net, &[1.0, -2.0, 3.0]), 6.0);
        assert_eq!(scalar(&net, &[0.0; 3]), 0.0);
        let one = build_l1_norm(1).unwrap();
        assert_eq!(scalar(&one, &[-4.0]), 4.0);
        assert_eq!(one.depth(), 1);
        assert!(one.width() <= 2);
        for f in 1..=6 {
            let net = build_l1_norm(f).unwrap();
            assert_eq!(net.depth(), f);
            assert!(net.width() <= f * f + 2usize.saturating_sub(f));
        }
        let shallow = build_l1_norm_shallow(3).unwrap();
        assert_eq!(scalar(&shallow, &[1.0, -2.0, 3.0]), 6.0);
    }

    #[test]
    fn sq_l2_examples() {
        let net = build_sq_l2_norm(2).unwrap();
        assert_eq!(scalar(&net, &[3.0, 4.0]), 25.0);
        assert_eq!(scalar(&net, &[0.0, 0.0]), 0.0);
        assert_eq!(scalar(&build_sq_l2_norm(1).unwrap(), &[-2.0]), 4.0);
        assert_eq!((net.depth(), net.width()), (1, 4));
    }

    #[test]
    fn mult_examples() {
        assert_eq!(build_mult(1).unwrap().eval(&[2.0, 3.0]).unwrap(), vec![6.0]);
        assert_eq!(
            build_mult(1).unwrap().eval(&[0.0, -7.0]).unwrap(),
            vec![0.0]
        );
        assert_eq!(
            build_mult(2).unwrap().eval(&[1.0, -2.0, 3.0, 4.0]).unwrap(),
            vec![3.0, -8.0]
        );
    }

    #[test]
    fn min_examples() {
        assert_eq!(scalar(&build_min(3).unwrap(), &[3.0, 1.0, 2.0]), 1.0);
        assert_eq!(scalar(&build_min(1).unwrap(), &[5.0]), 5.0);
        assert_eq!(scalar(&build_min(4).unwrap(), &[2.5; 4]), 2.5);
        for k in 1..=9usize {
            let net = build_min(k).unwrap();
            assert_eq!(net.depth(), (k as f64).log2().ceil() as usize);
            let x: Vec<f64> = (0..k).map(|i| ((i * 7 + 3) % 5) as f64 - 1.5).collect();
            let expect = x.iter().copied().fold(f64::INFINITY, f64::min);
            assert_eq!(scalar(&net, &x), expect);
        }
    }

    #[test]
    fn product_tree() {
        let net = build_product(5).unwrap();
        assert!((scalar(&net, &[1.0, 2.0, -3.0, 0.5, 4.0]) + 12.0).abs() < 1e-12);
        assert_eq!(net.depth(), 3);
    }

    #[test]
    fn inner_product_examples() {
        let net = build_inner_product(2).unwrap();
        assert_eq!(scalar(&net, &[1.0, 0.0, 1.0, 0.0]), 1.0);
        assert_eq!(scalar(&net, &[1.0, 0.0, 0.0, 1.0]), 0.0);
        assert_eq!(scalar(&net, &[1.0, 2.0, 3.0, 4.0]), 11.0);
        assert_eq!(net.depth(), 1);
    }

    #[test]
    fn bump_examples() {
        let (ds, d) = (0.2, 0.6);
        let net = build_bump(ds, d, 1).unwrap();
        assert!((scalar(&net, &[ds]) - 1.0).abs() < 1e-12);
        assert_eq!(scalar(&net, &[d]), 0.0);
        assert_eq!(scalar(&net, &[-0.9]), 0.0);
        assert!((scalar(&net, &[(ds + d) / 2.0]) - 0.5).abs() < 1e-12);
        let core = build_scalar_bump(ds, d).unwrap();
        assert_eq!(core.depth(), 2);
        assert!(core.width() <= 5);
        assert!(matches!(build_bump(0.5, 0.5, 1), Err(Error::Config(_))));
        let two = build_bump(ds, d, 2).unwrap();
        assert!((scalar(&two, &[0.0, 0.4]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn threshold_examples() {
        let net = build_threshold(3).unwrap();
        assert_eq!(scalar(&net, &[-1.0]), 1.0);
        assert_eq!(scalar(&net, &[1.0 / 6.0]), 0.0);
        assert!((scalar(&net, &[1.0 / 12.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parallelize_examples() {
        let both = parallelize(&[build_abs(), build_abs()]).unwrap();
        assert_eq!(both.eval(&[-1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(both.depth(), 2);
        let single = parallelize(&[build_abs()]).unwrap();
        assert_eq!(scalar(&single, &[-3.0]), 3.0);
        let mixed =
            parallelize(&[build_l1_norm(2).unwrap(), build_sq_l2_norm(2).unwrap()]).unwrap();
        assert_eq!(mixed.eval(&[3.0, -4.0, 3.0, 4.0]).unwrap(), vec![7.0, 25.0]);
        assert!(parallelize(&[]).is_err());
    }

    #[test]
    fn compose_examples() {
        let negate = CompiledNet::affine(Affine::linear(SparseMatrix::identity(1).scaled(-1.0)));
        let net = compose(&build_abs(), &negate).unwrap();
        assert_eq!(scalar(&net, &[3.0]), 3.0);
        assert_eq!(net.depth(), 1);
        let pair = parallelize_shallow(&[build_abs(), build_abs()]).unwrap();
        let net = compose(&build_min(2).unwrap(), &pair).unwrap();
        assert_eq!(scalar(&net, &[-3.0, 2.0]), 2.0);
        assert_eq!(net.depth(), 2);
        assert!(compose(&build_abs(), &pair).is_err());
    }

    #[test]
    fn offsets_and_fixed_inputs() {
        let shift = Affine::new(SparseMatrix::identity(1), vec![2.0]).unwrap();
        let net = CompiledNet::affine(shift.clone());
        assert_eq!(scalar(&net, &[1.5]), 3.5);
        let abs_shift = after(&shift, &build_abs()).unwrap();
        assert_eq!(scalar(&abs_shift, &[-1.0]), 3.0);
        assert_eq!(abs_shift.depth(), 1);
        let shifted_abs = before(&build_abs(), &shift).unwrap();
        assert_eq!(scalar(&shifted_abs, &[-3.0]), 1.0);
        assert_eq!(shifted_abs.depth(), 1);

        let ip = build_inner_product(2).unwrap();
        let fixed = fix_inputs(&ip, &[(2, 3.0), (3, 4.0)]).unwrap();
        assert_eq!(fixed.input_dim(), 2);
        assert_eq!(scalar(&fixed, &[1.0, 2.0]), 11.0);
        let sum = CompiledNet::affine(Affine::sum(2));
        let fixed = fix_inputs(&sum, &[(0, 5.0)]).unwrap();
        assert_eq!(scalar(&fixed, &[1.0]), 6.0);
    }

    #[test]
    fn stack_shares_input() {
        let net = stack(&[build_abs(), build_sq_l2_norm(1).unwrap()]).unwrap();
        assert_eq!(net.eval(&[-3.0]).unwrap(), vec![3.0, 9.0]);
        assert_eq!(net.depth(), 1);
    }

    #[test]
    fn json_round_trip_and_meta_check() {
        let net = build_l1_norm(2).unwrap();
        let text = serde_json::to_string(&net).unwrap();
        let back: CompiledNet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, net);
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["meta"]["nnz"] = serde_json::json!(1);
        assert!(serde_json::from_value::<CompiledNet>(value).is_err());
    }
}
