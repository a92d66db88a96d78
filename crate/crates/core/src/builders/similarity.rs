use crate::cohort::{PhenotypeKind, PhenotypeSchema};
use crate::numeric::Tensor;

use crate::numeric::gemm;

/// `u·v / (‖u‖‖v‖)`, defined as 0 when either vector is zero.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        (dot / (nu * nv)).clamp(-1.0, 1.0)
    }
}

/// Phenotype agreement between two subjects.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KroneckerSim {
    pub count: usize,
    pub sim: f64,
}

/// γ(q_ik, q_jk): exact equality for categorical, `|diff| <= theta` for
/// continuous phenotypes.
#[inline]
pub(crate) fn phenotype_match(kind: PhenotypeKind, a: f64, b: f64, theta: f64) -> bool {
    match kind {
        PhenotypeKind::Categorical => a == b,
        PhenotypeKind::Continuous => (a - b).abs() <= theta,
    }
}

pub fn kronecker_sim(qi: &[f64], qj: &[f64], schema: &PhenotypeSchema, theta: f64) -> KroneckerSim {
    let count = schema
        .phenotypes()
        .iter()
        .zip(qi.iter().zip(qj))
        .filter(|(p, (a, b))| phenotype_match(p.kind, **a, **b, theta))
        .count();
    KroneckerSim {
        count,
        sim: count as f64 / schema.len() as f64,
    }
}

/// Rows scaled to unit length; zero rows stay zero.
pub(crate) fn unit_rows(t: &Tensor) -> Tensor {
    let (rows, cols) = t.dims2();
    let mut out = t.clone();
    let values = out.values_mut();
    for r in 0..rows {
        let row = &mut values[r * cols..(r + 1) * cols];
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    out
}

/// Cosine similarities of rows `start..end` against every row, as a
/// row-major `(end - start) × n` block. `units` must come from [`unit_rows`].
pub(crate) fn similarity_block(units: &Tensor, start: usize, end: usize) -> Vec<f64> {
    let (n, d) = units.dims2();
    let block = &units.values()[start * d..end * d];
    let mut out = vec![0.0; (end - start) * n];
    gemm(end - start, d, n, block, (d as isize, 1), units.values(), (1, d as isize), &mut out, false);
    for v in &mut out {
        *v = v.clamp(-1.0, 1.0);
    }
    out
}
