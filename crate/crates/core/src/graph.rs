use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Tensor;

/// Graph construction method that produced a [`PopulationGraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BuilderMethod {
    #[serde(rename = "no-edges")]
    NoEdges,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "clinical-sim")]
    ClinicalSimilarity,
    #[serde(rename = "parisot")]
    Parisot,
    #[serde(rename = "knn-imaging")]
    KnnImaging,
    #[serde(rename = "knn-nonimaging")]
    KnnNonImaging,
    #[serde(rename = "knn-all")]
    KnnAll,
}

impl BuilderMethod {
    pub const ALL: [BuilderMethod; 7] = [
        BuilderMethod::NoEdges,
        BuilderMethod::Random,
        BuilderMethod::ClinicalSimilarity,
        BuilderMethod::Parisot,
        BuilderMethod::KnnImaging,
        BuilderMethod::KnnNonImaging,
        BuilderMethod::KnnAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuilderMethod::NoEdges => "no-edges",
            BuilderMethod::Random => "random",
            BuilderMethod::ClinicalSimilarity => "clinical-sim",
            BuilderMethod::Parisot => "parisot",
            BuilderMethod::KnnImaging => "knn-imaging",
            BuilderMethod::KnnNonImaging => "knn-nonimaging",
            BuilderMethod::KnnAll => "knn-all",
        }
    }
}

impl fmt::Display for BuilderMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuilderMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BuilderMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config("builder.method", format!("unknown method `{s}`")))
    }
}

/// Subjects as nodes, imaging features as node features, ages as labels and
/// an undirected edge set stored as sorted unique pairs `(i, j)` with `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationGraph {
    features: Tensor,
    labels: Vec<f64>,
    edges: Vec<(usize, usize)>,
    weights: Option<Vec<f64>>,
    method: BuilderMethod,
}

impl PopulationGraph {
    /// Canonicalizes `edges` (orders endpoints, sorts, drops duplicates).
    /// Self-loops and out-of-range endpoints are errors.
    pub fn new(
        features: Tensor,
        labels: Vec<f64>,
        edges: Vec<(usize, usize)>,
        method: BuilderMethod,
    ) -> Result<Self> {
        let weighted = edges.into_iter().map(|e| (e, 1.0)).collect();
        let mut g = PopulationGraph::with_weights(features, labels, weighted, method)?;
        g.weights = None;
        Ok(g)
    }

    /// Like [`new`](Self::new) but keeps one weight per edge; for duplicate
    /// pairs the first weight wins.
    pub fn with_weights(
        features: Tensor,
        labels: Vec<f64>,
        edges: Vec<((usize, usize), f64)>,
        method: BuilderMethod,
    ) -> Result<Self> {
        let n = labels.len();
        if features.rows() != n {
            return Err(Error::Shape {
                op: "population_graph",
                left: vec![n],
                right: features.shape().to_vec(),
            });
        }
        let mut canonical = Vec::with_capacity(edges.len());
        for ((a, b), w) in edges {
            if a >= n || b >= n {
                return Err(Error::config("edges", format!("edge ({a}, {b}) exceeds node count {n}")));
            }
            if a == b {
                return Err(Error::config("edges", format!("self-loop on node {a}")));
            }
            canonical.push(((a.min(b), a.max(b)), w));
        }
        canonical.sort_by_key(|&(e, _)| e);
        canonical.dedup_by_key(|&mut (e, _)| e);
        let (edges, weights) = canonical.into_iter().unzip();
        Ok(PopulationGraph {
            features,
            labels,
            edges,
            weights: Some(weights),
            method,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn method(&self) -> BuilderMethod {
        self.method
    }

    /// Undirected edge count.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge count with both directions stored, as message passing sees it.
    pub fn directed_edge_count(&self) -> usize {
        2 * self.edges.len()
    }

    /// Sorted neighbor lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count()];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Same edges, features and labels reordered so old node `i` becomes
    /// `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::config("permutation", "not a permutation of the node set"));
        }
        let cols = self.features.cols();
        let mut features = vec![0.0; n * cols];
        let mut labels = vec![0.0; n];
        for (old, &new) in perm.iter().enumerate() {
            features[new * cols..(new + 1) * cols].copy_from_slice(self.features.row(old));
            labels[new] = self.labels[old];
        }
        let weights = self.weights.clone().unwrap_or_else(|| vec![1.0; self.edges.len()]);
        let edges = self
            .edges
            .iter()
            .zip(weights)
            .map(|(&(i, j), w)| ((perm[i], perm[j]), w))
            .collect();
        let mut g = PopulationGraph::with_weights(
            Tensor::new(vec![n, cols], features)?,
            labels,
            edges,
            self.method,
        )?;
        if self.weights.is_none() {
            g.weights = None;
        }
        Ok(g)
    }

    /// Same nodes with a different edge set.
    pub fn with_edges(&self, edges: Vec<(usize, usize)>) -> Result<Self> {
        PopulationGraph::new(self.features.clone(), self.labels.clone(), edges, self.method)
    }
}
