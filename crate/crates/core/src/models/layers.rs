//! Graph layers recorded on a [`Tape`]. Each returns the post-ReLU output.

use std::sync::Arc;

use crate::error::Result;
use crate::numeric::{SparseMatrix, Tape, Var};

use super::operators::AttentionEdges;

/// `ReLU(x · w + b)`.
pub fn dense_layer(tape: &mut Tape, x: Var, w: Var, b: Var) -> Result<Var> {
    let h = tape.matmul(x, w)?;
    let h = tape.add_bias(h, b)?;
    Ok(tape.relu(h))
}

/// `ReLU(Â · x · w + b)`.
pub fn gcn_layer(tape: &mut Tape, x: Var, adjacency: &Arc<SparseMatrix>, w: Var, b: Var) -> Result<Var> {
    let ax = tape.spmm(adjacency.clone(), x)?;
    dense_layer(tape, ax, w, b)
}

/// `ReLU(x · w_self + mean_neighbors(x) · w_neigh + b)`.
pub fn sage_layer(
    tape: &mut Tape,
    x: Var,
    neighbor_mean: &Arc<SparseMatrix>,
    w_self: Var,
    w_neigh: Var,
    b: Var,
) -> Result<Var> {
    let own = tape.matmul(x, w_self)?;
    let mean = tape.spmm(neighbor_mean.clone(), x)?;
    let neigh = tape.matmul(mean, w_neigh)?;
    let h = tape.add(own, neigh)?;
    let h = tape.add_bias(h, b)?;
    Ok(tape.relu(h))
}

/// Weights of one attention head.
#[derive(Clone, Copy, Debug)]
pub struct AttentionHead {
    pub weight: Var,
    pub att_dst: Var,
    pub att_src: Var,
}

/// Attention coefficients `α` (storage order of `edges.pattern`) and the
/// aggregated, pre-activation output of one head.
pub fn attention_head(
    tape: &mut Tape,
    x: Var,
    edges: &AttentionEdges,
    head: AttentionHead,
    slope: f64,
) -> Result<(Var, Var)> {
    let h = tape.matmul(x, head.weight)?;
    let dst = tape.matmul(h, head.att_dst)?;
    let src = tape.matmul(h, head.att_src)?;
    let scores = tape.edge_pair_sum(dst, src, edges.targets.clone(), edges.sources.clone())?;
    let scores = tape.leaky_relu(scores, slope);
    let alpha = tape.segment_softmax(scores, edges.targets.clone())?;
    let out = tape.spmm_values(edges.pattern.clone(), alpha, h)?;
    Ok((alpha, out))
}

/// `ReLU(concat_h Σ_j α_ij W_h x_j + b)` with `e_ij = LeakyReLU(a_dst·W x_i + a_src·W x_j)`.
pub fn gat_layer(
    tape: &mut Tape,
    x: Var,
    edges: &AttentionEdges,
    heads: &[AttentionHead],
    b: Var,
    slope: f64,
) -> Result<Var> {
    let mut out: Option<Var> = None;
    for &head in heads {
        let (_, h) = attention_head(tape, x, edges, head, slope)?;
        out = Some(match out {
            None => h,
            Some(prev) => tape.concat_columns(prev, h)?,
        });
    }
    let out = out.expect("at least one attention head");
    let out = tape.add_bias(out, b)?;
    Ok(tape.relu(out))
}

/// `ReLU(Σ_k T_k(L̃) · x · w_k + b)` using the three-term recurrence on `x`.
pub fn cheb_layer(tape: &mut Tape, x: Var, laplacian: &Arc<SparseMatrix>, weights: &[Var], b: Var) -> Result<Var> {
    let mut prev: Option<Var> = None;
    let mut cur = x;
    let mut acc = tape.matmul(x, weights[0])?;
    for &w in &weights[1..] {
        let next = match prev {
            None => tape.spmm(laplacian.clone(), cur)?,
            Some(p) => {
                let lx = tape.spmm(laplacian.clone(), cur)?;
                let twice = tape.scale(lx, 2.0);
                let neg = tape.scale(p, -1.0);
                tape.add(twice, neg)?
            }
        };
        prev = Some(cur);
        cur = next;
        let term = tape.matmul(cur, w)?;
        acc = tape.add(acc, term)?;
    }
    let h = tape.add_bias(acc, b)?;
    Ok(tape.relu(h))
}
