//! Reverse-mode automatic differentiation over a linear trace.
//!
//! Every operation appends one node to the [`Tape`]. Operands always precede
//! their results, so a single reverse sweep over node ids visits the trace in
//! reverse topological order.

use std::sync::Arc;

use crate::error::{Error, Result};

use super::tensor::gemm;
use super::{SparseMatrix, Tensor};

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn id(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Spmm {
        matrix: Arc<SparseMatrix>,
        input: Var,
    },
    SpmmValues {
        pattern: Arc<SparseMatrix>,
        values: Var,
        input: Var,
    },
    Add(Var, Var),
    AddBias(Var, Var),
    Scale(Var, f64),
    Mul(Var, Var),
    Relu(Var),
    LeakyRelu(Var, f64),
    ConcatCols(Var, Var),
    RowMean(Var),
    SelectRows(Var, Arc<[usize]>),
    EdgePairSum {
        dst: Var,
        src: Var,
        rows: Arc<[usize]>,
        cols: Arc<[usize]>,
    },
    SegmentSoftmax {
        input: Var,
        segments: Arc<[usize]>,
    },
    Sum(Var),
    Mse(Var, Var),
    Mae(Var, Var),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    grad: Option<Vec<f64>>,
    requires_grad: bool,
    op: Op,
}

/// The computation trace: values, lazily allocated gradients and backward rules.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

fn shape_err(op: &'static str, a: &Tensor, b: &Tensor) -> Error {
    Error::Shape {
        op,
        left: a.shape().to_vec(),
        right: b.shape().to_vec(),
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Trainable input: receives a gradient on [`backward`](Self::backward).
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, true, Op::Leaf)
    }

    /// Input that is never differentiated.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, false, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.nodes[v.0].grad.as_deref()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor, requires_grad: bool, op: Op) -> Var {
        self.nodes.push(Node {
            value,
            grad: None,
            requires_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn push_op(&mut self, value: Tensor, operands: &[Var], op: Op) -> Var {
        let rg = operands.iter().any(|v| self.nodes[v.0].requires_grad);
        self.push(value, rg, op)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let (m, k) = ta.dims2();
        let (k2, n) = tb.dims2();
        if k != k2 {
            return Err(shape_err("matmul", ta, tb));
        }
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, ta.values(), (k as isize, 1), tb.values(), (n as isize, 1), &mut out, false);
        let value = Tensor::new(vec![m, n], out)?;
        Ok(self.push_op(value, &[a, b], Op::MatMul(a, b)))
    }

    /// Constant sparse matrix times a differentiable dense input.
    pub fn spmm(&mut self, matrix: Arc<SparseMatrix>, input: Var) -> Result<Var> {
        let value = matrix.mul_dense(self.value(input))?;
        Ok(self.push_op(value, &[input], Op::Spmm { matrix, input }))
    }

    /// Sparse matrix whose stored values (storage order) come from the tape.
    pub fn spmm_values(
        &mut self,
        pattern: Arc<SparseMatrix>,
        values: Var,
        input: Var,
    ) -> Result<Var> {
        let vals = self.value(values);
        if vals.len() != pattern.nnz() {
            return Err(Error::Shape {
                op: "spmm_values",
                left: vec![pattern.nnz()],
                right: vals.shape().to_vec(),
            });
        }
        let weighted = pattern.with_values(vals.values().to_vec())?;
        let value = weighted.mul_dense(self.value(input))?;
        Ok(self.push_op(
            value,
            &[values, input],
            Op::SpmmValues {
                pattern,
                values,
                input,
            },
        ))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(shape_err("add", ta, tb));
        }
        let values = ta.values().iter().zip(tb.values()).map(|(x, y)| x + y).collect();
        let value = Tensor::new(ta.shape().to_vec(), values)?;
        Ok(self.push_op(value, &[a, b], Op::Add(a, b)))
    }

    /// Adds a length-`cols` bias to every row of `x`.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (tx, tb) = (self.value(x), self.value(bias));
        let (rows, cols) = tx.dims2();
        if tb.len() != cols {
            return Err(shape_err("add_bias", tx, tb));
        }
        let mut values = tx.values().to_vec();
        for r in 0..rows {
            for (v, b) in values[r * cols..(r + 1) * cols].iter_mut().zip(tb.values()) {
                *v += b;
            }
        }
        let value = Tensor::new(tx.shape().to_vec(), values)?;
        Ok(self.push_op(value, &[x, bias], Op::AddBias(x, bias)))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        let tx = self.value(x);
        let values = tx.values().iter().map(|v| v * factor).collect();
        let value = Tensor::new(tx.shape().to_vec(), values).expect("same shape");
        self.push_op(value, &[x], Op::Scale(x, factor))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(shape_err("mul", ta, tb));
        }
        let values = ta.values().iter().zip(tb.values()).map(|(x, y)| x * y).collect();
        let value = Tensor::new(ta.shape().to_vec(), values)?;
        Ok(self.push_op(value, &[a, b], Op::Mul(a, b)))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let tx = self.value(x);
        let values = tx.values().iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
        let value = Tensor::new(tx.shape().to_vec(), values).expect("same shape");
        self.push_op(value, &[x], Op::Relu(x))
    }

    pub fn leaky_relu(&mut self, x: Var, slope: f64) -> Var {
        let tx = self.value(x);
        let values = tx
            .values()
            .iter()
            .map(|&v| if v > 0.0 { v } else { slope * v })
            .collect();
        let value = Tensor::new(tx.shape().to_vec(), values).expect("same shape");
        self.push_op(value, &[x], Op::LeakyRelu(x, slope))
    }

    pub fn concat_columns(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let (ra, ca) = ta.dims2();
        let (rb, cb) = tb.dims2();
        if ra != rb {
            return Err(shape_err("concat_columns", ta, tb));
        }
        let mut values = Vec::with_capacity(ra * (ca + cb));
        for r in 0..ra {
            values.extend_from_slice(&ta.values()[r * ca..(r + 1) * ca]);
            values.extend_from_slice(&tb.values()[r * cb..(r + 1) * cb]);
        }
        let value = Tensor::new(vec![ra, ca + cb], values)?;
        Ok(self.push_op(value, &[a, b], Op::ConcatCols(a, b)))
    }

    /// Mean of each row, producing a `rows × 1` column.
    pub fn row_mean(&mut self, x: Var) -> Var {
        let tx = self.value(x);
        let (rows, cols) = tx.dims2();
        let values = (0..rows)
            .map(|r| {
                if cols == 0 {
                    0.0
                } else {
                    tx.values()[r * cols..(r + 1) * cols].iter().sum::<f64>() / cols as f64
                }
            })
            .collect();
        let value = Tensor::new(vec![rows, 1], values).expect("rows × 1");
        self.push_op(value, &[x], Op::RowMean(x))
    }

    pub fn select_rows(&mut self, x: Var, indices: Arc<[usize]>) -> Result<Var> {
        let tx = self.value(x);
        let (rows, cols) = tx.dims2();
        if let Some(&bad) = indices.iter().find(|&&i| i >= rows) {
            return Err(Error::Shape {
                op: "select_rows",
                left: tx.shape().to_vec(),
                right: vec![bad],
            });
        }
        let mut values = Vec::with_capacity(indices.len() * cols);
        for &i in indices.iter() {
            values.extend_from_slice(&tx.values()[i * cols..(i + 1) * cols]);
        }
        let value = Tensor::new(vec![indices.len(), cols], values)?;
        Ok(self.push_op(value, &[x], Op::SelectRows(x, indices)))
    }

    /// Per-edge score `dst[rows[e]] + src[cols[e]]` for node-level column
    /// vectors `dst` and `src`.
    pub fn edge_pair_sum(
        &mut self,
        dst: Var,
        src: Var,
        rows: Arc<[usize]>,
        cols: Arc<[usize]>,
    ) -> Result<Var> {
        let (td, ts) = (self.value(dst), self.value(src));
        if td.cols() != 1 || ts.cols() != 1 || rows.len() != cols.len() {
            return Err(shape_err("edge_pair_sum", td, ts));
        }
        let (nd, ns) = (td.len(), ts.len());
        if rows.iter().any(|&r| r >= nd) || cols.iter().any(|&c| c >= ns) {
            return Err(shape_err("edge_pair_sum", td, ts));
        }
        let values = rows
            .iter()
            .zip(cols.iter())
            .map(|(&r, &c)| td.values()[r] + ts.values()[c])
            .collect();
        let value = Tensor::vector(values);
        Ok(self.push_op(value, &[dst, src], Op::EdgePairSum { dst, src, rows, cols }))
    }

    /// Softmax over groups of entries sharing the same segment id.
    pub fn segment_softmax(&mut self, scores: Var, segments: Arc<[usize]>) -> Result<Var> {
        let ts = self.value(scores);
        if ts.len() != segments.len() {
            return Err(Error::Shape {
                op: "segment_softmax",
                left: ts.shape().to_vec(),
                right: vec![segments.len()],
            });
        }
        let values = segment_softmax_values(ts.values(), &segments);
        let value = Tensor::vector(values);
        Ok(self.push_op(value, &[scores], Op::SegmentSoftmax { input: scores, segments }))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let total = self.value(x).values().iter().sum();
        self.push_op(Tensor::scalar(total), &[x], Op::Sum(x))
    }

    pub fn mse_loss(&mut self, pred: Var, target: Var) -> Result<Var> {
        let (tp, tt) = (self.value(pred), self.value(target));
        if tp.len() != tt.len() || tp.is_empty() {
            return Err(shape_err("mse_loss", tp, tt));
        }
        let n = tp.len() as f64;
        let loss = tp
            .values()
            .iter()
            .zip(tt.values())
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>()
            / n;
        Ok(self.push_op(Tensor::scalar(loss), &[pred, target], Op::Mse(pred, target)))
    }

    pub fn mae_loss(&mut self, pred: Var, target: Var) -> Result<Var> {
        let (tp, tt) = (self.value(pred), self.value(target));
        if tp.len() != tt.len() || tp.is_empty() {
            return Err(shape_err("mae_loss", tp, tt));
        }
        let n = tp.len() as f64;
        let loss = tp
            .values()
            .iter()
            .zip(tt.values())
            .map(|(p, t)| (p - t).abs())
            .sum::<f64>()
            / n;
        Ok(self.push_op(Tensor::scalar(loss), &[pred, target], Op::Mae(pred, target)))
    }

    /// Accumulates d`loss`/d`v` into every node that requires a gradient.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.value(loss).len() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        for node in &mut self.nodes {
            node.grad = None;
        }
        self.nodes[loss.0].grad = Some(vec![1.0]);

        for id in (0..=loss.0).rev() {
            if !self.nodes[id].requires_grad {
                continue;
            }
            let Some(grad) = self.nodes[id].grad.take() else {
                continue;
            };
            let contributions = self.backward_rule(id, &grad);
            self.nodes[id].grad = Some(grad);
            for (target, delta) in contributions {
                let node = &mut self.nodes[target.0];
                match &mut node.grad {
                    Some(acc) => acc.iter_mut().zip(&delta).for_each(|(a, d)| *a += d),
                    None => node.grad = Some(delta),
                }
            }
        }
        Ok(())
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn backward_rule(&self, id: usize, g: &[f64]) -> Vec<(Var, Vec<f64>)> {
        let node = &self.nodes[id];
        let mut out = Vec::new();
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let (m, k) = ta.dims2();
                let n = tb.cols();
                if self.wants(*a) {
                    // dA = G · Bᵀ
                    let mut da = vec![0.0; m * k];
                    gemm(m, n, k, g, (n as isize, 1), tb.values(), (1, n as isize), &mut da, false);
                    out.push((*a, da));
                }
                if self.wants(*b) {
                    // dB = Aᵀ · G
                    let mut db = vec![0.0; k * n];
                    gemm(k, m, n, ta.values(), (1, k as isize), g, (n as isize, 1), &mut db, false);
                    out.push((*b, db));
                }
            }
            Op::Spmm { matrix, input } => {
                if self.wants(*input) {
                    let width = node.value.cols();
                    let mut d = vec![0.0; matrix.cols() * width];
                    matrix.transpose().mul_dense_raw(g, width, &mut d);
                    out.push((*input, d));
                }
            }
            Op::SpmmValues {
                pattern,
                values,
                input,
            } => {
                let width = node.value.cols();
                let vals = self.value(*values).values();
                let dense = self.value(*input).values();
                if self.wants(*values) {
                    let mut dv = vec![0.0; pattern.nnz()];
                    let offsets = pattern.row_offsets();
                    for r in 0..pattern.rows() {
                        let gr = &g[r * width..(r + 1) * width];
                        for p in offsets[r]..offsets[r + 1] {
                            let c = pattern.col_indices()[p];
                            let dr = &dense[c * width..(c + 1) * width];
                            dv[p] = gr.iter().zip(dr).map(|(x, y)| x * y).sum();
                        }
                    }
                    out.push((*values, dv));
                }
                if self.wants(*input) {
                    let weighted = pattern.with_values(vals.to_vec()).expect("nnz checked");
                    let mut d = vec![0.0; pattern.cols() * width];
                    weighted.transpose().mul_dense_raw(g, width, &mut d);
                    out.push((*input, d));
                }
            }
            Op::Add(a, b) => {
                for v in [a, b] {
                    if self.wants(*v) {
                        out.push((*v, g.to_vec()));
                    }
                }
            }
            Op::AddBias(x, b) => {
                if self.wants(*x) {
                    out.push((*x, g.to_vec()));
                }
                if self.wants(*b) {
                    let cols = node.value.cols();
                    let mut db = vec![0.0; cols];
                    for row in g.chunks(cols.max(1)) {
                        db.iter_mut().zip(row).for_each(|(d, v)| *d += v);
                    }
                    out.push((*b, db));
                }
            }
            Op::Scale(x, f) => {
                if self.wants(*x) {
                    out.push((*x, g.iter().map(|v| v * f).collect()));
                }
            }
            Op::Mul(a, b) => {
                let (ta, tb) = (self.value(*a).values(), self.value(*b).values());
                if self.wants(*a) {
                    out.push((*a, g.iter().zip(tb).map(|(g, y)| g * y).collect()));
                }
                if self.wants(*b) {
                    out.push((*b, g.iter().zip(ta).map(|(g, x)| g * x).collect()));
                }
            }
            Op::Relu(x) => {
                let tx = self.value(*x).values();
                let d = g
                    .iter()
                    .zip(tx)
                    .map(|(g, &v)| if v > 0.0 { *g } else { 0.0 })
                    .collect();
                out.push((*x, d));
            }
            Op::LeakyRelu(x, slope) => {
                let tx = self.value(*x).values();
                let d = g
                    .iter()
                    .zip(tx)
                    .map(|(g, &v)| {
                        if v > 0.0 {
                            *g
                        } else if v < 0.0 {
                            slope * g
                        } else {
                            0.0
                        }
                    })
                    .collect();
                out.push((*x, d));
            }
            Op::ConcatCols(a, b) => {
                let ca = self.value(*a).cols();
                let cb = self.value(*b).cols();
                let rows = node.value.rows();
                let width = ca + cb;
                if self.wants(*a) {
                    let mut d = Vec::with_capacity(rows * ca);
                    for r in 0..rows {
                        d.extend_from_slice(&g[r * width..r * width + ca]);
                    }
                    out.push((*a, d));
                }
                if self.wants(*b) {
                    let mut d = Vec::with_capacity(rows * cb);
                    for r in 0..rows {
                        d.extend_from_slice(&g[r * width + ca..(r + 1) * width]);
                    }
                    out.push((*b, d));
                }
            }
            Op::RowMean(x) => {
                let (rows, cols) = self.value(*x).dims2();
                let mut d = vec![0.0; rows * cols];
                for r in 0..rows {
                    let share = g[r] / cols as f64;
                    d[r * cols..(r + 1) * cols].iter_mut().for_each(|v| *v = share);
                }
                out.push((*x, d));
            }
            Op::SelectRows(x, indices) => {
                let (rows, cols) = self.value(*x).dims2();
                let mut d = vec![0.0; rows * cols];
                for (k, &i) in indices.iter().enumerate() {
                    for c in 0..cols {
                        d[i * cols + c] += g[k * cols + c];
                    }
                }
                out.push((*x, d));
            }
            Op::EdgePairSum {
                dst,
                src,
                rows,
                cols,
            } => {
                if self.wants(*dst) {
                    let mut d = vec![0.0; self.value(*dst).len()];
                    for (e, &r) in rows.iter().enumerate() {
                        d[r] += g[e];
                    }
                    out.push((*dst, d));
                }
                if self.wants(*src) {
                    let mut d = vec![0.0; self.value(*src).len()];
                    for (e, &c) in cols.iter().enumerate() {
                        d[c] += g[e];
                    }
                    out.push((*src, d));
                }
            }
            Op::SegmentSoftmax { input, segments } => {
                let y = node.value.values();
                let groups = segments.iter().copied().max().map_or(0, |m| m + 1);
                let mut dot = vec![0.0; groups];
                for ((&s, yv), gv) in segments.iter().zip(y).zip(g) {
                    dot[s] += yv * gv;
                }
                let d = segments
                    .iter()
                    .zip(y)
                    .zip(g)
                    .map(|((&s, yv), gv)| yv * (gv - dot[s]))
                    .collect();
                out.push((*input, d));
            }
            Op::Sum(x) => {
                out.push((*x, vec![g[0]; self.value(*x).len()]));
            }
            Op::Mse(p, t) => {
                let (tp, tt) = (self.value(*p).values(), self.value(*t).values());
                let scale = 2.0 * g[0] / tp.len() as f64;
                let d: Vec<f64> = tp.iter().zip(tt).map(|(p, t)| scale * (p - t)).collect();
                if self.wants(*t) {
                    out.push((*t, d.iter().map(|v| -v).collect()));
                }
                if self.wants(*p) {
                    out.push((*p, d));
                }
            }
            Op::Mae(p, t) => {
                let (tp, tt) = (self.value(*p).values(), self.value(*t).values());
                let scale = g[0] / tp.len() as f64;
                let d: Vec<f64> = tp
                    .iter()
                    .zip(tt)
                    .map(|(p, t)| {
                        let diff = p - t;
                        if diff > 0.0 {
                            scale
                        } else if diff < 0.0 {
                            -scale
                        } else {
                            0.0
                        }
                    })
                    .collect();
                if self.wants(*t) {
                    out.push((*t, d.iter().map(|v| -v).collect()));
                }
                if self.wants(*p) {
                    out.push((*p, d));
                }
            }
        }
        out
    }
}

/// Numerically stable softmax within each segment.
pub fn segment_softmax_values(scores: &[f64], segments: &[usize]) -> Vec<f64> {
    let groups = segments.iter().copied().max().map_or(0, |m| m + 1);
    let mut max = vec![f64::NEG_INFINITY; groups];
    for (&s, &v) in segments.iter().zip(scores) {
        max[s] = max[s].max(v);
    }
    let exps: Vec<f64> = segments
        .iter()
        .zip(scores)
        .map(|(&s, &v)| (v - max[s]).exp())
        .collect();
    let mut total = vec![0.0; groups];
    for (&s, e) in segments.iter().zip(&exps) {
        total[s] += e;
    }
    segments.iter().zip(exps).map(|(&s, e)| e / total[s]).collect()
}
