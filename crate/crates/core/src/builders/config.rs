use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BuilderMethod;

/// How continuous phenotypes count as a match in the clinical-similarity
/// builder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClinicalTolerance {
    /// `|q_ik - q_jk| <= theta`.
    Theta,
    /// Smallest tolerance at which the graph reaches the edge budget.
    Budget,
}

/// Directed-edge budget: each undirected edge counts twice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeBudget {
    pub min: f64,
    pub max: f64,
}

impl EdgeBudget {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    /// Undirected pair count matching the budget midpoint.
    pub fn target_pairs(&self) -> usize {
        (self.midpoint() / 2.0).round() as usize
    }

    pub fn contains_with_slack(&self, directed_edges: usize, slack: f64) -> bool {
        let e = directed_edges as f64;
        e >= self.min * (1.0 - slack) && e <= self.max * (1.0 + slack)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuilderConfig {
    pub method: BuilderMethod,
    /// Clinical match threshold in phenotype-count units.
    pub mu: f64,
    /// Unit-step threshold for continuous phenotypes.
    pub theta: f64,
    pub clinical_tolerance: ClinicalTolerance,
    /// Neighbors per node for the kNN builders.
    pub k: usize,
    /// Directed-edge budget at `budget_reference_subjects` nodes; scaled
    /// linearly with cohort size.
    pub edge_budget_min: f64,
    pub edge_budget_max: f64,
    pub budget_reference_subjects: usize,
    pub seed: u64,
}

impl Default for BuilderConfig {
    fn default() -> Self {
        BuilderConfig {
            method: BuilderMethod::KnnImaging,
            mu: 18.0,
            theta: 0.1,
            clinical_tolerance: ClinicalTolerance::Budget,
            k: 5,
            edge_budget_min: 40_000.0,
            edge_budget_max: 50_000.0,
            budget_reference_subjects: 6500,
            seed: 0,
        }
    }
}

impl BuilderConfig {
    pub fn for_method(method: BuilderMethod) -> Self {
        BuilderConfig {
            method,
            ..BuilderConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::config("builder.k", "must be at least 1"));
        }
        // μ above K is accepted and yields an empty clinical graph
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::config("builder.mu", "must be finite and non-negative"));
        }
        if !(self.theta > 0.0) {
            return Err(Error::config("builder.theta", "must be positive"));
        }
        if !(self.edge_budget_min >= 0.0 && self.edge_budget_min <= self.edge_budget_max) {
            return Err(Error::config("builder.edge_budget_min", "must satisfy 0 <= min <= max"));
        }
        if self.budget_reference_subjects < 2 {
            return Err(Error::config("builder.budget_reference_subjects", "must be at least 2"));
        }
        Ok(())
    }

    /// Budget for a cohort of `n` subjects.
    pub fn budget_for(&self, n: usize) -> EdgeBudget {
        let scale = n as f64 / self.budget_reference_subjects as f64;
        EdgeBudget {
            min: self.edge_budget_min * scale,
            max: self.edge_budget_max * scale,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_scales_with_cohort_size() {
        let c = BuilderConfig::default();
        let b = c.budget_for(6500);
        assert_eq!((b.min, b.max), (40_000.0, 50_000.0));
        assert_eq!(b.target_pairs(), 22_500);
        let b = c.budget_for(1300);
        assert!((b.min - 8000.0).abs() < 1e-9 && (b.max - 10_000.0).abs() < 1e-9);
    }

    #[test]
    fn validation() {
        let ok = BuilderConfig::default();
        assert!(ok.validate().is_ok());
        assert!(BuilderConfig { k: 0, ..ok.clone() }.validate().is_err());
        assert!(BuilderConfig { theta: 0.0, ..ok.clone() }.validate().is_err());
        assert!(BuilderConfig {
            edge_budget_min: 10.0,
            edge_budget_max: 5.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
    }
}
