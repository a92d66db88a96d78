use std::sync::Arc;

use crate::error::Result;
use crate::graph::PopulationGraph;
use crate::numeric::SparseMatrix;

use super::Architecture;

/// `D̂^{-1/2} (A + I) D̂^{-1/2}` over the binary adjacency.
pub fn normalize_adjacency(graph: &PopulationGraph) -> Result<SparseMatrix> {
    let n = graph.node_count();
    let d: Vec<f64> = graph.degrees().into_iter().map(|d| (d + 1) as f64).collect();
    let mut triplets = Vec::with_capacity(n + 2 * graph.edge_count());
    for i in 0..n {
        triplets.push((i, i, 1.0 / d[i]));
    }
    for &(i, j) in graph.edges() {
        let w = 1.0 / (d[i] * d[j]).sqrt();
        triplets.push((i, j, w));
        triplets.push((j, i, w));
    }
    SparseMatrix::from_triplets(n, n, triplets)
}

/// `2 L_sym / λ_max - I` with `λ_max = 2`, i.e. `-D^{-1/2} A D^{-1/2}`.
/// Isolated nodes contribute nothing.
pub fn scaled_laplacian(graph: &PopulationGraph) -> Result<SparseMatrix> {
    let n = graph.node_count();
    let degrees = graph.degrees();
    let mut triplets = Vec::with_capacity(2 * graph.edge_count());
    for &(i, j) in graph.edges() {
        let w = -1.0 / ((degrees[i] * degrees[j]) as f64).sqrt();
        triplets.push((i, j, w));
        triplets.push((j, i, w));
    }
    SparseMatrix::from_triplets(n, n, triplets)
}

/// Row-normalized adjacency: row `i` averages the neighbors of `i`; rows of
/// isolated nodes are empty.
pub fn neighbor_mean(graph: &PopulationGraph) -> Result<SparseMatrix> {
    let n = graph.node_count();
    let degrees = graph.degrees();
    let mut triplets = Vec::with_capacity(2 * graph.edge_count());
    for &(i, j) in graph.edges() {
        triplets.push((i, j, 1.0 / degrees[i] as f64));
        triplets.push((j, i, 1.0 / degrees[j] as f64));
    }
    SparseMatrix::from_triplets(n, n, triplets)
}

/// Attention edges `j → i` including self-loops, stored as a CSR pattern
/// whose rows are targets.
#[derive(Clone, Debug)]
pub struct AttentionEdges {
    pub pattern: Arc<SparseMatrix>,
    pub targets: Arc<[usize]>,
    pub sources: Arc<[usize]>,
}

pub fn attention_edges(graph: &PopulationGraph) -> Result<AttentionEdges> {
    let n = graph.node_count();
    let mut triplets: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, 1.0)).collect();
    for &(i, j) in graph.edges() {
        triplets.push((i, j, 1.0));
        triplets.push((j, i, 1.0));
    }
    let pattern = SparseMatrix::from_triplets(n, n, triplets)?;
    let targets: Arc<[usize]> = pattern.row_indices().into();
    let sources: Arc<[usize]> = pattern.col_indices().to_vec().into();
    Ok(AttentionEdges {
        pattern: Arc::new(pattern),
        targets,
        sources,
    })
}

/// Graph operator an architecture propagates with, built once per graph.
#[derive(Clone, Debug)]
pub enum Propagation {
    None,
    Gcn(Arc<SparseMatrix>),
    Sage(Arc<SparseMatrix>),
    Gat(AttentionEdges),
    Cheb(Arc<SparseMatrix>),
}

impl Propagation {
    pub fn new(architecture: Architecture, graph: &PopulationGraph) -> Result<Self> {
        Ok(match architecture {
            Architecture::Mlp => Propagation::None,
            Architecture::Gcn => Propagation::Gcn(Arc::new(normalize_adjacency(graph)?)),
            Architecture::Sage => Propagation::Sage(Arc::new(neighbor_mean(graph)?)),
            Architecture::Gat => Propagation::Gat(attention_edges(graph)?),
            Architecture::Cheb => Propagation::Cheb(Arc::new(scaled_laplacian(graph)?)),
        })
    }
}
