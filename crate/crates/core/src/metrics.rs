//! Regression homophily and degree statistics for population graphs.

use serde::{Deserialize, Serialize};

use crate::graph::{BuilderMethod, PopulationGraph};

/// Mean edge agreement `1 - |y_i - y_j| / (y_max - y_min)` over all edges.
///
/// `None` for an empty edge set; `1` when all labels are equal.
pub fn homophily(graph: &PopulationGraph) -> Option<f64> {
    homophily_of(graph.edges(), graph.labels())
}

pub(crate) fn homophily_of(edges: &[(usize, usize)], labels: &[f64]) -> Option<f64> {
    if edges.is_empty() {
        return None;
    }
    let (min, max) = labels
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    let range = max - min;
    if !(range > 0.0) {
        return Some(1.0);
    }
    let total: f64 = edges
        .iter()
        .map(|&(i, j)| 1.0 - (labels[i] - labels[j]).abs() / range)
        .sum();
    Some((total / edges.len() as f64).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub mean: f64,
    pub min: usize,
    pub max: usize,
    pub isolated: usize,
}

pub fn degree_stats(graph: &PopulationGraph) -> DegreeStats {
    let degrees = graph.degrees();
    if degrees.is_empty() {
        return DegreeStats {
            mean: 0.0,
            min: 0,
            max: 0,
            isolated: 0,
        };
    }
    DegreeStats {
        mean: degrees.iter().sum::<usize>() as f64 / degrees.len() as f64,
        min: degrees.iter().copied().min().unwrap_or(0),
        max: degrees.iter().copied().max().unwrap_or(0),
        isolated: degrees.iter().filter(|&&d| d == 0).count(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomophilyReport {
    pub method: BuilderMethod,
    pub homophily: Option<f64>,
    pub edges: usize,
    pub degree: DegreeStats,
}

impl HomophilyReport {
    pub fn of(graph: &PopulationGraph) -> Self {
        HomophilyReport {
            method: graph.method(),
            homophily: homophily(graph),
            edges: graph.edge_count(),
            degree: degree_stats(graph),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Tensor;
    use proptest::prelude::*;

    fn graph(labels: Vec<f64>, edges: Vec<(usize, usize)>) -> PopulationGraph {
        let n = labels.len();
        PopulationGraph::new(Tensor::zeros(vec![n, 1]), labels, edges, BuilderMethod::Random).unwrap()
    }

    #[test]
    fn extremes() {
        assert_eq!(homophily(&graph(vec![1.0, 1.0, 5.0], vec![(0, 1)])), Some(1.0));
        assert_eq!(homophily(&graph(vec![1.0, 3.0, 5.0], vec![(0, 2)])), Some(0.0));
        assert_eq!(homophily(&graph(vec![1.0, 3.0], vec![])), None);
        assert_eq!(homophily(&graph(vec![2.0, 2.0, 2.0], vec![(0, 2)])), Some(1.0));
    }

    #[test]
    fn degree_cases() {
        let s = degree_stats(&graph(vec![0.0; 5], vec![]));
        assert_eq!((s.mean, s.min, s.max, s.isolated), (0.0, 0, 0, 5));
        let complete = (0..4).flat_map(|i| ((i + 1)..4).map(move |j| (i, j))).collect();
        let s = degree_stats(&graph(vec![0.0; 4], complete));
        assert_eq!((s.mean, s.min, s.max, s.isolated), (3.0, 3, 3, 0));
        let s = degree_stats(&graph(vec![0.0; 3], vec![(0, 1), (1, 2)]));
        assert!((s.mean - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!((s.min, s.max, s.isolated), (1, 2, 0));
    }

    #[test]
    fn report_presence_tracks_edges() {
        let r = HomophilyReport::of(&graph(vec![0.0, 1.0], vec![]));
        assert!(r.homophily.is_none() && r.edges == 0);
        let r = HomophilyReport::of(&graph(vec![0.0, 1.0], vec![(0, 1)]));
        assert!(r.homophily.is_some() && r.edges == 1);
    }

    fn labels_and_edges() -> impl Strategy<Value = (Vec<f64>, Vec<(usize, usize)>)> {
        (3usize..30).prop_flat_map(|n| {
            (
                proptest::collection::vec(-50.0f64..50.0, n),
                proptest::collection::vec((0..n, 0..n), 1..60),
            )
                .prop_map(|(labels, pairs)| {
                    let edges = pairs.into_iter().filter(|(a, b)| a != b).collect();
                    (labels, edges)
                })
        })
    }

    proptest! {
        #[test]
        fn bounded_and_affine_invariant((labels, edges) in labels_and_edges(), a in 0.1f64..10.0, b in -100.0f64..100.0) {
            prop_assume!(!edges.is_empty());
            let g = graph(labels.clone(), edges.clone());
            let h = homophily(&g).unwrap();
            prop_assert!((0.0..=1.0).contains(&h));
            let shifted = graph(labels.iter().map(|y| a * y + b).collect(), edges);
            prop_assert!((homophily(&shifted).unwrap() - h).abs() < 1e-9);
        }

        #[test]
        fn extreme_edge_lowers_ratio((labels, edges) in labels_and_edges()) {
            prop_assume!(!edges.is_empty());
            let g = graph(labels.clone(), edges.clone());
            let h = homophily(&g).unwrap();
            let lo = (0..labels.len()).min_by(|&i, &j| labels[i].total_cmp(&labels[j])).unwrap();
            let hi = (0..labels.len()).max_by(|&i, &j| labels[i].total_cmp(&labels[j])).unwrap();
            prop_assume!(labels[lo] < labels[hi] && h > 0.0);
            let pair = (lo.min(hi), lo.max(hi));
            prop_assume!(!g.edges().contains(&pair));
            let mut more = g.edges().to_vec();
            more.push(pair);
            let h2 = homophily(&graph(labels, more)).unwrap();
            prop_assert!(h2 < h);
        }
    }
}
