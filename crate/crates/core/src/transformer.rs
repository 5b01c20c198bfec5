//! Multi-head attention and the conversion of layered networks into transformers.
//!
//! A block holds `N` tokens of width `t_in`, flattened row-major. It applies
//! the per-entry activation `Z = σ(X + b)`, then every head `h` returns the
//! attention-weighted average of the value tokens `(V_h Z)_n`, and the head
//! outputs are concatenated. Value maps act on the whole flattened token
//! matrix and produce `N` value tokens of width `t_out`.
//!
//! Attention masses are `a_n = w_n e^{s_n} / Σ_m w_m e^{s_m}` with scores
//! `s_n = λ⟨Q x, K Z_n⟩ / √t_in`, where `x = Σ w_n Z_n` is the weighted mean
//! token and the internal token weights are uniform. With `Q = K = 0` the
//! masses are `1/N` for every `λ`, so a head with `V_h = N·E^h·W` outputs
//! token block `h` of `W·Z` exactly; `N` such heads reproduce any weight
//! matrix.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::netbuilder::{ActivationParams, CompiledNet};
use crate::sparse::SparseMatrix;

/// One attention head; `q` and `k` map tokens (`t_in`) to a shared score space.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionHead {
    pub q: SparseMatrix,
    pub k: SparseMatrix,
    /// `(N·t_out) × (N·t_in)` operator on the flattened token matrix.
    pub v: SparseMatrix,
    pub lambda: f64,
}

impl AttentionHead {
    pub fn new(q: SparseMatrix, k: SparseMatrix, v: SparseMatrix, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!(
                "temperature must be positive, got {lambda}"
            )));
        }
        check_dim(q.rows(), k.rows())?;
        check_dim(q.cols(), k.cols())?;
        Ok(AttentionHead { q, k, v, lambda })
    }

    fn nnz(&self) -> usize {
        self.q.nnz() + self.k.nnz() + self.v.nnz()
    }

    fn scores_vanish(&self) -> bool {
        self.q.nnz() == 0 || self.k.nnz() == 0
    }
}

/// Weighted softmax masses `w_n e^{s_n} / Σ_m w_m e^{s_m}`.
fn attention_masses(scores: &[f64], weights: &[f64]) -> Vec<f64> {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = scores
        .iter()
        .zip(weights)
        .map(|(&s, &w)| w * (s - top).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / total).collect()
}

fn token_scores(head: &AttentionHead, query: &[f64], tokens: &[&[f64]]) -> Vec<f64> {
    if head.scores_vanish() {
        return vec![0.0; tokens.len()];
    }
    let qx = head.q.matvec(query);
    let scale = head.lambda / (head.q.cols() as f64).sqrt();
    tokens
        .iter()
        .map(|z| {
            let kz = head.k.matvec(z);
            scale * qx.iter().zip(&kz).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect()
}

/// Value tokens `(V Z)_n` with their attention masses, for query `x` and weighted tokens.
pub fn attention_eval(
    head: &AttentionHead,
    query: &[f64],
    tokens: &[Vec<f64>],
    weights: &[f64],
) -> Result<Vec<(Vec<f64>, f64)>> {
    let n = tokens.len();
    check_dim(n, weights.len())?;
    if n == 0 {
        return Err(Error::Config("attention needs at least one token".into()));
    }
    let t_in = head.q.cols();
    check_dim(t_in, query.len())?;
    for t in tokens {
        check_dim(t_in, t.len())?;
    }
    if head.v.cols() != n * t_in || !head.v.rows().is_multiple_of(n) {
        return Err(Error::Dimension {
            expected: n * t_in,
            got: head.v.cols(),
        });
    }
    let refs: Vec<&[f64]> = tokens.iter().map(Vec::as_slice).collect();
    let masses = attention_masses(&token_scores(head, query, &refs), weights);
    let flat: Vec<f64> = tokens.iter().flatten().copied().collect();
    let values = head.v.matvec(&flat);
    let t_out = head.v.rows() / n;
    Ok(values
        .chunks(t_out)
        .map(<[f64]>::to_vec)
        .zip(masses)
        .collect())
}

/// `N` heads with zero queries and keys whose concatenated outputs equal `B·Z`.
///
/// `b` maps the flattened `N × t_in` token matrix to `N × t_out`; head `h`
/// carries `V_h = N·E^h·B`, the rows of output token `h` scaled by `N` and
/// placed in value token 0.
pub fn build_matmul_heads(b: &SparseMatrix, n: usize) -> Result<Vec<AttentionHead>> {
    if n == 0 || !b.rows().is_multiple_of(n) || !b.cols().is_multiple_of(n) {
        return Err(Error::Config(format!(
            "a {}×{} matrix does not split into {n} tokens",
            b.rows(),
            b.cols()
        )));
    }
    let (t_out, t_in) = (b.rows() / n, b.cols() / n);
    let scale = n as f64;
    (0..n)
        .map(|h| {
            let mut rows: Vec<Vec<(usize, f64)>> = (0..t_out)
                .map(|r| {
                    b.row(h * t_out + r)
                        .iter()
                        .map(|&(j, v)| (j, v * scale))
                        .collect()
                })
                .collect();
            rows.resize(n * t_out, Vec::new());
            AttentionHead::new(
                SparseMatrix::zeros(t_in, t_in),
                SparseMatrix::zeros(t_in, t_in),
                SparseMatrix::from_rows(b.cols(), rows),
                1.0,
            )
        })
        .collect()
}

/// Activation and bias followed by multi-head attention.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformerBlock {
    pub heads: Vec<AttentionHead>,
    /// Bias over the flattened `N × t_in` token matrix.
    pub bias: Vec<f64>,
    pub act: Vec<ActivationParams>,
    /// Token widths in and out.
    pub t_in: usize,
    pub t_out: usize,
    /// Unpadded feature counts of the layer this block represents.
    pub in_features: usize,
    pub out_features: usize,
}

impl TransformerBlock {
    fn nnz(&self) -> usize {
        self.heads.iter().map(AttentionHead::nnz).sum::<usize>()
            + self.bias.iter().filter(|&&b| b != 0.0).count()
    }

    fn apply(&self, x: &[f64], n: usize) -> Vec<f64> {
        let z: Vec<f64> = x
            .iter()
            .zip(&self.bias)
            .zip(&self.act)
            .map(|((&xi, &b), a)| a.apply(xi + b))
            .collect();
        let tokens: Vec<&[f64]> = z.chunks(self.t_in).collect();
        let weights = vec![1.0 / n as f64; n];
        let mut query = vec![0.0; self.t_in];
        for t in &tokens {
            for (q, v) in query.iter_mut().zip(*t) {
                *q += v / n as f64;
            }
        }
        let mut out = Vec::with_capacity(self.heads.len() * self.t_out);
        for head in &self.heads {
            let masses = attention_masses(&token_scores(head, &query, &tokens), &weights);
            let values = head.v.matvec(&z);
            let mut token = vec![0.0; self.t_out];
            for (chunk, a) in values.chunks(self.t_out).zip(&masses) {
                for (o, v) in token.iter_mut().zip(chunk) {
                    *o += a * v;
                }
            }
            out.extend(token);
        }
        out
    }
}

/// Size accounting of a transformer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformerMeta {
    pub depth: usize,
    pub width: usize,
    pub max_heads: usize,
    pub nnz: usize,
}

/// A stack of transformer blocks over `N` tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformerNet {
    blocks: Vec<TransformerBlock>,
    tokens: usize,
}

impl TransformerNet {
    pub fn new(blocks: Vec<TransformerBlock>, tokens: usize) -> Result<Self> {
        if blocks.is_empty() || tokens == 0 {
            return Err(Error::Config(
                "a transformer needs blocks and at least one token".into(),
            ));
        }
        for b in &blocks {
            check_dim(tokens * b.t_in, b.bias.len())?;
            check_dim(tokens * b.t_in, b.act.len())?;
            if b.heads.len() != tokens {
                return Err(Error::Config(format!(
                    "block has {} heads, expected one per token ({tokens})",
                    b.heads.len()
                )));
            }
            for h in &b.heads {
                check_dim(b.t_in, h.q.cols())?;
                check_dim(tokens * b.t_in, h.v.cols())?;
                check_dim(tokens * b.t_out, h.v.rows())?;
            }
            if b.in_features > tokens * b.t_in || b.out_features > tokens * b.t_out {
                return Err(Error::Config(
                    "logical features exceed the token layout".into(),
                ));
            }
        }
        for pair in blocks.windows(2) {
            check_dim(pair[0].t_out, pair[1].t_in)?;
            check_dim(pair[0].out_features, pair[1].in_features)?;
        }
        Ok(TransformerNet { blocks, tokens })
    }

    pub fn blocks(&self) -> &[TransformerBlock] {
        &self.blocks
    }

    pub fn tokens(&self) -> usize {
        self.tokens
    }

    pub fn input_dim(&self) -> usize {
        self.blocks[0].in_features
    }

    pub fn output_dim(&self) -> usize {
        self.blocks.last().unwrap().out_features
    }

    pub fn depth(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn width(&self) -> usize {
        self.blocks[1..]
            .iter()
            .map(|b| b.in_features)
            .max()
            .unwrap_or(0)
    }

    pub fn max_heads(&self) -> usize {
        self.blocks.iter().map(|b| b.heads.len()).max().unwrap_or(0)
    }

    pub fn nnz(&self) -> usize {
        self.blocks.iter().map(TransformerBlock::nnz).sum()
    }

    pub fn meta(&self) -> TransformerMeta {
        TransformerMeta {
            depth: self.depth(),
            width: self.width(),
            max_heads: self.max_heads(),
            nnz: self.nnz(),
        }
    }
}

/// Runs `t` on a flat input of its logical input dimension.
pub fn transformer_eval(t: &TransformerNet, input: &[f64]) -> Result<Vec<f64>> {
    check_dim(t.input_dim(), input.len())?;
    let mut x = input.to_vec();
    x.resize(t.tokens * t.blocks[0].t_in, 0.0);
    for block in &t.blocks {
        x = block.apply(&x, t.tokens);
    }
    x.truncate(t.output_dim());
    Ok(x)
}

/// Re-expresses `net` as a transformer over `n` tokens with identical input-output map.
///
/// Every layer becomes one block with `n` heads from [`build_matmul_heads`];
/// feature dimensions are zero-padded to multiples of `n`, padded entries
/// get zero bias and identity activation, and outputs are trimmed.
pub fn transformerify(net: &CompiledNet, n: usize) -> Result<TransformerNet> {
    if n == 0 {
        return Err(Error::Config("token count must be positive".into()));
    }
    let blocks = net
        .layers()
        .iter()
        .map(|layer| {
            let (d_in, d_out) = (layer.in_dim(), layer.out_dim());
            let (t_in, t_out) = (d_in.div_ceil(n).max(1), d_out.div_ceil(n).max(1));
            let mut rows: Vec<Vec<(usize, f64)>> =
                (0..d_out).map(|i| layer.weight.row(i).to_vec()).collect();
            rows.resize(n * t_out, Vec::new());
            let padded = SparseMatrix::from_rows(n * t_in, rows);
            let mut bias = layer.bias.clone();
            bias.resize(n * t_in, 0.0);
            let mut act = layer.act.clone();
            act.resize(n * t_in, ActivationParams::IDENTITY);
            Ok(TransformerBlock {
                heads: build_matmul_heads(&padded, n)?,
                bias,
                act,
                t_in,
                t_out,
                in_features: d_in,
                out_features: d_out,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TransformerNet::new(blocks, n)
}

#[derive(Serialize, Deserialize)]
struct HeadJson {
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    k: Vec<Vec<f64>>,
    #[serde(rename = "V")]
    v: Vec<Vec<f64>>,
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    heads: Vec<HeadJson>,
    bias: Vec<f64>,
    act: Vec<ActivationParams>,
    t_in: usize,
    t_out: usize,
    in_features: usize,
    out_features: usize,
}

#[derive(Serialize, Deserialize)]
struct TransformerJson {
    tokens: usize,
    blocks: Vec<BlockJson>,
    #[serde(default)]
    meta: Option<TransformerMeta>,
}

impl Serialize for TransformerNet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TransformerJson {
            tokens: self.tokens,
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockJson {
                    heads: b
                        .heads
                        .iter()
                        .map(|h| HeadJson {
                            q: h.q.to_dense(),
                            k: h.k.to_dense(),
                            v: h.v.to_dense(),
                            lambda: h.lambda,
                        })
                        .collect(),
                    bias: b.bias.clone(),
                    act: b.act.clone(),
                    t_in: b.t_in,
                    t_out: b.t_out,
                    in_features: b.in_features,
                    out_features: b.out_features,
                })
                .collect(),
            meta: Some(self.meta()),
        }
        .serialize(s)
    }
}

impl TryFrom<TransformerJson> for TransformerNet {
    type Error = Error;
    fn try_from(raw: TransformerJson) -> Result<Self> {
        let n = raw.tokens;
        let blocks = raw
            .blocks
            .into_iter()
            .map(|b| {
                let heads = b
                    .heads
                    .into_iter()
                    .map(|h| {
                        AttentionHead::new(
                            SparseMatrix::from_dense(b.t_in, &h.q)?,
                            SparseMatrix::from_dense(b.t_in, &h.k)?,
                            SparseMatrix::from_dense(n * b.t_in, &h.v)?,
                            h.lambda,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(TransformerBlock {
                    heads,
                    bias: b.bias,
                    act: b.act,
                    t_in: b.t_in,
                    t_out: b.t_out,
                    in_features: b.in_features,
                    out_features: b.out_features,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let net = TransformerNet::new(blocks, n)?;
        if let Some(meta) = raw.meta {
            if meta != net.meta() {
                return Err(Error::Malformed(format!(
                    "recorded meta {meta:?} disagrees with the blocks ({:?})",
                    net.meta()
                )));
            }
        }
        Ok(net)
    }
}

impl<'de> Deserialize<'de> for TransformerNet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        TransformerNet::try_from(TransformerJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netbuilder::{build_abs, build_l1_norm, build_min, build_mult, Layer};

    fn head(q: Vec<Vec<f64>>, k: Vec<Vec<f64>>, v: SparseMatrix, lambda: f64) -> AttentionHead {
        let t = q[0].len();
        AttentionHead::new(
            SparseMatrix::from_dense(t, &q).unwrap(),
            SparseMatrix::from_dense(t, &k).unwrap(),
            v,
            lambda,
        )
        .unwrap()
    }

    #[test]
    fn zero_scores_follow_weights() {
        let h = head(
            vec![vec![0.0]],
            vec![vec![0.0]],
            SparseMatrix::identity(3),
            1.0,
        );
        let out = attention_eval(
            &h,
            &[0.3],
            &[vec![1.0], vec![2.0], vec![3.0]],
            &[0.5, 0.25, 0.25],
        )
        .unwrap();
        let masses: Vec<f64> = out.iter().map(|o| o.1).collect();
        assert_eq!(masses, vec![0.5, 0.25, 0.25]);
        assert_eq!(out[2].0, vec![3.0]);
    }

    #[test]
    fn single_token_gets_full_mass() {
        let h = head(
            vec![vec![1.0]],
            vec![vec![2.0]],
            SparseMatrix::identity(1).scaled(3.0),
            1.0,
        );
        let out = attention_eval(&h, &[0.7], &[vec![2.0]], &[1.0]).unwrap();
        assert_eq!(out, vec![(vec![6.0], 1.0)]);
    }

    #[test]
    fn large_temperature_concentrates() {
        let h = head(
            vec![vec![1.0]],
            vec![vec![1.0]],
            SparseMatrix::identity(3),
            1e3,
        );
        let out = attention_eval(
            &h,
            &[1.0],
            &[vec![0.1], vec![0.5], vec![0.3]],
            &[1.0 / 3.0; 3],
        )
        .unwrap();
        assert!((out[1].1 - 1.0).abs() < 1e-6);
        let total: f64 = out.iter().map(|o| o.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matmul_heads_reproduce_matrix() {
        let n = 3;
        let dense: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..12).map(|j| ((i * 12 + j) % 7) as f64 - 3.0).collect())
            .collect();
        let b = SparseMatrix::from_dense(12, &dense).unwrap();
        let heads = build_matmul_heads(&b, n).unwrap();
        assert_eq!(heads.len(), n);
        let x: Vec<f64> = (0..12).map(|j| (j as f64 * 0.37).sin()).collect();
        let tokens: Vec<Vec<f64>> = x.chunks(4).map(<[f64]>::to_vec).collect();
        let mut got = Vec::new();
        for h in &heads {
            let out = attention_eval(h, &[0.0; 4], &tokens, &[1.0 / 3.0; 3]).unwrap();
            let mut token = vec![0.0; 2];
            for (v, a) in out {
                for (t, vi) in token.iter_mut().zip(v) {
                    *t += a * vi;
                }
            }
            got.extend(token);
        }
        for (g, e) in got.iter().zip(b.matvec(&x)) {
            assert!((g - e).abs() < 1e-12);
        }
        let zero = build_matmul_heads(&SparseMatrix::zeros(3, 3), 3).unwrap();
        assert!(zero.iter().all(|h| h.nnz() == 0));
    }

    #[test]
    fn conversion_preserves_maps_and_sizes() {
        for (net, n) in [
            (build_abs(), 1),
            (build_abs(), 2),
            (build_l1_norm(3).unwrap(), 3),
            (build_min(5).unwrap(), 2),
            (build_mult(2).unwrap(), 4),
            (CompiledNet::identity(4), 2),
        ] {
            let t = transformerify(&net, n).unwrap();
            assert_eq!((t.depth(), t.width()), (net.depth(), net.width()));
            assert!(t.nnz() <= 2 * net.nnz());
            assert!(t.blocks().iter().all(|b| b.heads.len() == n));
            for s in 0..50 {
                let x: Vec<f64> = (0..net.input_dim())
                    .map(|i| ((s * 31 + i * 17) % 19) as f64 * 0.5 - 4.5)
                    .collect();
                let (a, b) = (net.eval(&x).unwrap(), transformer_eval(&t, &x).unwrap());
                for (p, q) in a.iter().zip(&b) {
                    assert!((p - q).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn bias_only_block() {
        let layer = Layer::new(
            SparseMatrix::from_rows(2, vec![vec![(0, 1.0), (1, 2.0)]]),
            vec![1.0, -0.5],
            vec![ActivationParams::RELU; 2],
        )
        .unwrap();
        let net = CompiledNet::new(vec![layer]).unwrap();
        let t = transformerify(&net, 2).unwrap();
        // σ(0 + 1) + 2·σ(0 − 0.5) = 1
        assert_eq!(transformer_eval(&t, &[0.0, 0.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn json_round_trip() {
        let t = transformerify(&build_l1_norm(2).unwrap(), 2).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        let back: TransformerNet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
    }
}
