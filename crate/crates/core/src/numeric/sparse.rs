use crate::error::{Error, Result};

use super::Tensor;

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row; duplicate
/// triplets are summed on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(Error::Shape {
                op: "sparse_from_triplets",
                left: vec![rows, cols],
                right: vec![r, c],
            });
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
                continue;
            }
            last = Some((r, c));
            row_offsets[r + 1] += 1;
            col_indices.push(c);
            values.push(v);
        }
        for r in 0..rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            row_offsets: vec![0; rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row index of every stored entry, in storage order.
    pub fn row_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.rows {
            let len = self.row_offsets[r + 1] - self.row_offsets[r];
            out.extend(std::iter::repeat_n(r, len));
        }
        out
    }

    /// Same sparsity pattern, new values (storage order).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.nnz() {
            return Err(Error::Shape {
                op: "sparse_with_values",
                left: vec![self.nnz()],
                right: vec![values.len()],
            });
        }
        Ok(SparseMatrix {
            values,
            ..self.clone()
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        match self.col_indices[span.clone()].binary_search(&c) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Tensor {
        let mut out = Tensor::zeros(vec![self.rows, self.cols]);
        let cols = self.cols;
        let dense = out.values_mut();
        for r in 0..self.rows {
            for p in self.row_offsets[r]..self.row_offsets[r + 1] {
                dense[r * cols + self.col_indices[p]] += self.values[p];
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // rows are visited in increasing order, so the transposed rows stay sorted
        for r in 0..self.rows {
            for p in self.row_offsets[r]..self.row_offsets[r + 1] {
                let c = self.col_indices[p];
                let slot = next[c];
                col_indices[slot] = r;
                values[slot] = self.values[p];
                next[c] += 1;
            }
        }
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// `self · dense` where `dense` is a row-major `self.cols × width` buffer.
    pub(crate) fn mul_dense_raw(&self, dense: &[f64], width: usize, out: &mut [f64]) {
        debug_assert_eq!(dense.len(), self.cols * width);
        debug_assert_eq!(out.len(), self.rows * width);
        for r in 0..self.rows {
            let acc = &mut out[r * width..(r + 1) * width];
            for p in self.row_offsets[r]..self.row_offsets[r + 1] {
                let v = self.values[p];
                let src = &dense[self.col_indices[p] * width..(self.col_indices[p] + 1) * width];
                for (a, s) in acc.iter_mut().zip(src) {
                    *a += v * s;
                }
            }
        }
    }

    /// Non-differentiable sparse × dense product.
    pub fn mul_dense(&self, dense: &Tensor) -> Result<Tensor> {
        let (k, width) = dense.dims2();
        if k != self.cols {
            return Err(Error::Shape {
                op: "spmm",
                left: vec![self.rows, self.cols],
                right: dense.shape().to_vec(),
            });
        }
        let mut out = vec![0.0; self.rows * width];
        self.mul_dense_raw(dense.values(), width, &mut out);
        Tensor::new(vec![self.rows, width], out)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.values[self.row_offsets[r]..self.row_offsets[r + 1]].iter().sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let s = SparseMatrix::from_triplets(2, 2, [(0, 1, 1.0), (0, 1, 2.0), (1, 0, 4.0)]).unwrap();
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.get(0, 1), 3.0);
        assert_eq!(s.row_offsets(), &[0, 1, 2]);
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        assert!(SparseMatrix::from_triplets(2, 2, [(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn transpose_round_trips() {
        let s = SparseMatrix::from_triplets(3, 2, [(0, 1, 1.0), (2, 0, 2.0), (1, 1, 5.0)]).unwrap();
        assert_eq!(s.transpose().transpose(), s);
        assert_eq!(s.transpose().get(1, 2), 0.0);
        assert_eq!(s.transpose().get(0, 2), 2.0);
    }

    #[test]
    fn empty_times_dense_is_zero() {
        let s = SparseMatrix::empty(3, 3);
        let d = Tensor::filled(vec![3, 2], 7.0);
        assert!(s.mul_dense(&d).unwrap().values().iter().all(|&v| v == 0.0));
    }
}
