//! Population-graph construction methods.
//!
//! Every builder returns a [`PopulationGraph`] whose node features are the
//! cohort's imaging matrix and whose labels are ages. Builders that control
//! their own sparsity (random, Parisot, budget-calibrated clinical) aim for
//! the midpoint of [`BuilderConfig::budget_for`]. Ties are always broken
//! towards the smaller index pair.

mod config;
mod select;
mod similarity;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cohort::{Cohort, PhenotypeKind};
use crate::error::{Error, Result};
use crate::graph::{BuilderMethod, PopulationGraph};
use crate::numeric::Tensor;

pub use config::{BuilderConfig, ClinicalTolerance, EdgeBudget};
pub use similarity::{cosine_similarity, kronecker_sim, KroneckerSim};

use select::TopPairs;
use similarity::{phenotype_match, similarity_block, unit_rows};

/// Source of the vectors a kNN graph compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KnnSource {
    Imaging,
    NonImaging,
    All,
}

const BLOCK_ROWS: usize = 128;

fn graph_from(cohort: &Cohort, edges: Vec<(usize, usize)>, method: BuilderMethod) -> Result<PopulationGraph> {
    PopulationGraph::new(cohort.imaging().clone(), cohort.ages().to_vec(), edges, method)
}

/// Dispatches on `config.method`.
pub fn build(cohort: &Cohort, config: &BuilderConfig) -> Result<PopulationGraph> {
    config.validate()?;
    match config.method {
        BuilderMethod::NoEdges => build_no_edges(cohort),
        BuilderMethod::Random => build_random_er(cohort, config),
        BuilderMethod::ClinicalSimilarity => build_clinical_similarity(cohort, config),
        BuilderMethod::Parisot => build_parisot(cohort, config),
        BuilderMethod::KnnImaging => build_knn(cohort, config, KnnSource::Imaging),
        BuilderMethod::KnnNonImaging => build_knn(cohort, config, KnnSource::NonImaging),
        BuilderMethod::KnnAll => build_knn(cohort, config, KnnSource::All),
    }
}

pub fn build_no_edges(cohort: &Cohort) -> Result<PopulationGraph> {
    graph_from(cohort, Vec::new(), BuilderMethod::NoEdges)
}

/// Inclusion probability giving `pairs` expected undirected edges on `n` nodes.
pub fn er_probability(n: usize, pairs: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    2.0 * pairs / (n as f64 * (n as f64 - 1.0))
}

/// Erdős–Rényi graph: every pair is kept independently with the probability
/// that hits the budget midpoint in expectation.
pub fn build_random_er(cohort: &Cohort, config: &BuilderConfig) -> Result<PopulationGraph> {
    let n = cohort.len();
    let budget = config.budget_for(n);
    let possible = n * n.saturating_sub(1) / 2;
    if budget.max / 2.0 > possible as f64 {
        return Err(Error::config(
            "builder.edge_budget_max",
            format!("{} directed edges exceed the {} available on {n} nodes", budget.max, 2 * possible),
        ));
    }
    let p = er_probability(n, budget.target_pairs() as f64);
    let mut edges = Vec::new();
    if p > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
    }
    graph_from(cohort, edges, BuilderMethod::Random)
}

/// Kronecker-delta similarity graph: `(i, j)` is an edge when at least `mu`
/// phenotypes agree.
///
/// With [`ClinicalTolerance::Theta`] continuous phenotypes agree when they
/// differ by at most `theta`. With [`ClinicalTolerance::Budget`] the
/// continuous tolerance is the smallest one admitting the budgeted edge
/// count: each pair needs `ceil(mu) - (categorical matches)` continuous
/// matches, so its admitting tolerance is that order statistic of its
/// continuous differences, and the pairs with the smallest such tolerances
/// are kept.
pub fn build_clinical_similarity(cohort: &Cohort, config: &BuilderConfig) -> Result<PopulationGraph> {
    let n = cohort.len();
    let q = cohort.phenotypes();
    let schema = cohort.schema();
    let kinds: Vec<PhenotypeKind> = (0..schema.len()).map(|k| schema.kind(k)).collect();
    let required = config.mu.ceil() as usize;
    let mut edges = Vec::new();

    match config.clinical_tolerance {
        ClinicalTolerance::Theta => {
            for i in 0..n {
                let qi = q.row(i);
                for j in (i + 1)..n {
                    let qj = q.row(j);
                    let count = kinds
                        .iter()
                        .zip(qi.iter().zip(qj))
                        .filter(|(&kind, (a, b))| phenotype_match(kind, **a, **b, config.theta))
                        .count();
                    if count >= required {
                        edges.push((i, j));
                    }
                }
            }
        }
        ClinicalTolerance::Budget => {
            let categorical: Vec<usize> = (0..kinds.len())
                .filter(|&k| kinds[k] == PhenotypeKind::Categorical)
                .collect();
            let continuous: Vec<usize> = (0..kinds.len())
                .filter(|&k| kinds[k] == PhenotypeKind::Continuous)
                .collect();
            let mut top = TopPairs::new(config.budget_for(n).target_pairs());
            let mut diffs = Vec::with_capacity(continuous.len());
            for i in 0..n {
                let qi = q.row(i);
                for j in (i + 1)..n {
                    let qj = q.row(j);
                    let matched = categorical.iter().filter(|&&k| qi[k] == qj[k]).count();
                    let needed = required.saturating_sub(matched);
                    if needed > continuous.len() {
                        continue;
                    }
                    let tolerance = if needed == 0 {
                        0.0
                    } else {
                        diffs.clear();
                        diffs.extend(continuous.iter().map(|&k| (qi[k] - qj[k]).abs()));
                        let (_, nth, _) = diffs.select_nth_unstable_by(needed - 1, f64::total_cmp);
                        *nth
                    };
                    top.offer(-tolerance, (i, j));
                }
            }
            edges = top.into_sorted().into_iter().map(|(p, _)| p).collect();
        }
    }
    graph_from(cohort, edges, BuilderMethod::ClinicalSimilarity)
}

/// Parisot weight `W(i, j) = cos(x_i, x_j) · Σ_k γ(q_ik, q_jk)`.
pub fn parisot_weight(xi: &[f64], xj: &[f64], qi: &[f64], qj: &[f64], kinds: &[PhenotypeKind], theta: f64) -> f64 {
    let agreement = kinds
        .iter()
        .zip(qi.iter().zip(qj))
        .filter(|(&kind, (a, b))| phenotype_match(kind, **a, **b, theta))
        .count();
    cosine_similarity(xi, xj) * agreement as f64
}

/// Keeps the budgeted number of pairs with the largest positive Parisot
/// weight; the weights stay on the edges.
pub fn build_parisot(cohort: &Cohort, config: &BuilderConfig) -> Result<PopulationGraph> {
    let n = cohort.len();
    let q = cohort.phenotypes();
    let schema = cohort.schema();
    let kinds: Vec<PhenotypeKind> = (0..schema.len()).map(|k| schema.kind(k)).collect();
    let units = unit_rows(cohort.imaging());
    let mut top = TopPairs::new(config.budget_for(n).target_pairs());

    for start in (0..n).step_by(BLOCK_ROWS) {
        let end = (start + BLOCK_ROWS).min(n);
        let sims = similarity_block(&units, start, end);
        for i in start..end {
            let qi = q.row(i);
            let row = &sims[(i - start) * n..(i - start + 1) * n];
            for j in (i + 1)..n {
                let cos = row[j];
                if cos <= 0.0 {
                    continue;
                }
                let qj = q.row(j);
                let agreement = kinds
                    .iter()
                    .zip(qi.iter().zip(qj))
                    .filter(|(&kind, (a, b))| phenotype_match(kind, **a, **b, config.theta))
                    .count();
                let w = cos * agreement as f64;
                if w > 0.0 {
                    top.offer(w, (i, j));
                }
            }
        }
    }
    let edges = top.into_sorted();
    PopulationGraph::with_weights(
        cohort.imaging().clone(),
        cohort.ages().to_vec(),
        edges,
        BuilderMethod::Parisot,
    )
}

fn knn_vectors(cohort: &Cohort, source: KnnSource) -> Result<Tensor> {
    match source {
        KnnSource::Imaging => Ok(cohort.imaging().clone()),
        KnnSource::NonImaging => Ok(cohort.phenotypes().clone()),
        KnnSource::All => {
            let (x, q) = (cohort.imaging(), cohort.phenotypes());
            let n = cohort.len();
            let mut values = Vec::with_capacity(n * (x.cols() + q.cols()));
            for i in 0..n {
                values.extend_from_slice(x.row(i));
                values.extend_from_slice(q.row(i));
            }
            Tensor::new(vec![n, x.cols() + q.cols()], values)
        }
    }
}

/// Links every node to its `k` most cosine-similar other nodes, then takes
/// the union of the directed lists.
pub fn build_knn(cohort: &Cohort, config: &BuilderConfig, source: KnnSource) -> Result<PopulationGraph> {
    let n = cohort.len();
    let k = config.k;
    if k >= n {
        return Err(Error::config("builder.k", format!("k = {k} must be below the node count {n}")));
    }
    let units = unit_rows(&knn_vectors(cohort, source)?);
    let mut edges = Vec::with_capacity(n * k);
    let mut candidates: Vec<usize> = Vec::with_capacity(n);
    for start in (0..n).step_by(BLOCK_ROWS) {
        let end = (start + BLOCK_ROWS).min(n);
        let sims = similarity_block(&units, start, end);
        for i in start..end {
            let row = &sims[(i - start) * n..(i - start + 1) * n];
            candidates.clear();
            candidates.extend((0..n).filter(|&j| j != i));
            let better = |a: &usize, b: &usize| row[*b].total_cmp(&row[*a]).then(a.cmp(b));
            if candidates.len() > k {
                candidates.select_nth_unstable_by(k - 1, better);
                candidates.truncate(k);
            }
            edges.extend(candidates.iter().map(|&j| (i, j)));
        }
    }
    let method = match source {
        KnnSource::Imaging => BuilderMethod::KnnImaging,
        KnnSource::NonImaging => BuilderMethod::KnnNonImaging,
        KnnSource::All => BuilderMethod::KnnAll,
    };
    graph_from(cohort, edges, method)
}

#[cfg(test)]
mod tests;
