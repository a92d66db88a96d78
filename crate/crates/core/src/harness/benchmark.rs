use std::fmt::Write as _;
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::builders::{build, BuilderConfig};
use crate::cohort::{split, Cohort, SplitFractions};
use crate::error::{Error, Result};
use crate::graph::{BuilderMethod, PopulationGraph};
use crate::metrics::{degree_stats, homophily, DegreeStats};
use crate::models::{Architecture, ModelConfig};

use super::train::{evaluate, train, History, TrainConfig};

/// Which builder × model cells to run and how often.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub builders: Vec<BuilderMethod>,
    /// Models trained on every builder except `no-edges`, which always
    /// pairs with the MLP baseline.
    pub models: Vec<Architecture>,
    pub repeats: usize,
    pub seed: u64,
    /// Cells trained concurrently.
    pub threads: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            builders: BuilderMethod::ALL.to_vec(),
            models: Architecture::GNNS.to_vec(),
            repeats: 3,
            seed: 0,
            threads: 1,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.builders.is_empty() {
            return Err(Error::config("benchmark.builders", "at least one builder is required"));
        }
        if self.repeats == 0 {
            return Err(Error::config("benchmark.repeats", "must be at least 1"));
        }
        if self.threads == 0 {
            return Err(Error::config("benchmark.threads", "must be at least 1"));
        }
        Ok(())
    }

    /// The (builder, model) cells in report order.
    pub fn cells(&self) -> Vec<(BuilderMethod, Architecture)> {
        let mut cells = Vec::new();
        for &b in &self.builders {
            if b == BuilderMethod::NoEdges {
                cells.push((b, Architecture::Mlp));
            } else {
                cells.extend(self.models.iter().filter(|&&m| m != Architecture::Mlp).map(|&m| (b, m)));
            }
        }
        cells.dedup();
        cells
    }
}

/// 64-bit FNV-1a over the parts, each followed by a 0xff separator.
pub fn cell_seed(global: u64, builder: &str, model: &str, repeat: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes.iter().chain(&[0xff]) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    eat(&global.to_le_bytes());
    eat(builder.as_bytes());
    eat(model.as_bytes());
    eat(&(repeat as u64).to_le_bytes());
    h
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub builder: BuilderMethod,
    pub homophily: Option<f64>,
    pub edges: usize,
    pub directed_edges: usize,
    pub degree: DegreeStats,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub model_seed: u64,
    pub split_seed: u64,
    pub best_epoch: usize,
    pub test_mae: f64,
    pub test_r2: Option<f64>,
    pub history: History,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub builder: BuilderMethod,
    pub model: Architecture,
    pub homophily: Option<f64>,
    pub edges: usize,
    pub runs: Vec<RunResult>,
    pub mean_test_mae: Option<f64>,
    pub mean_test_r2: Option<f64>,
    pub error: Option<String>,
    /// Not serialized, so written reports stay byte-reproducible.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl CellResult {
    pub fn is_populated(&self) -> bool {
        self.error.is_none() && self.mean_test_mae.is_some_and(f64::is_finite)
    }
}

/// Everything needed to reproduce the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub subjects: usize,
    pub imaging_features: usize,
    pub phenotypes: usize,
    pub split: SplitFractions,
    pub builder: BuilderConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub benchmark: BenchmarkConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub provenance: Provenance,
    pub graphs: Vec<GraphSummary>,
    pub cells: Vec<CellResult>,
}

impl BenchmarkReport {
    pub fn cell(&self, builder: BuilderMethod, model: Architecture) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.builder == builder && c.model == model)
    }

    /// Aligned plain-text table, one row per cell.
    pub fn to_table(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# subjects={} imaging_features={} phenotypes={} repeats={} seed={} epochs={} lr={} weight_decay={}",
            p.subjects,
            p.imaging_features,
            p.phenotypes,
            p.benchmark.repeats,
            p.benchmark.seed,
            p.train.epochs,
            p.train.learning_rate,
            p.train.weight_decay
        );
        let _ = writeln!(
            out,
            "# hidden={} fc={} cheb_order={} heads={} k={} mu={} clinical_tolerance={:?} budget=[{}, {}]@{}",
            p.model.hidden,
            p.model.fc,
            p.model.cheb_order,
            p.model.heads,
            p.builder.k,
            p.builder.mu,
            p.builder.clinical_tolerance,
            p.builder.edge_budget_min,
            p.builder.edge_budget_max,
            p.builder.budget_reference_subjects
        );
        let _ = writeln!(
            out,
            "{:<16} {:<6} {:>10} {:>8} {:>10} {:>8}  status",
            "builder", "model", "homophily", "edges", "MAE", "R2"
        );
        let fmt = |v: Option<f64>, digits: usize| v.map_or("-".to_string(), |x| format!("{x:.digits$}"));
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:<16} {:<6} {:>10} {:>8} {:>10} {:>8}  {}",
                c.builder.name(),
                c.model.name(),
                fmt(c.homophily, 4),
                c.edges,
                fmt(c.mean_test_mae, 3),
                fmt(c.mean_test_r2, 3),
                c.error.as_deref().unwrap_or("ok")
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn run_cell(
    graph: &PopulationGraph,
    cohort_len: usize,
    fractions: &SplitFractions,
    model: &ModelConfig,
    train_config: &TrainConfig,
    bench: &BenchmarkConfig,
) -> Result<Vec<RunResult>> {
    let mut runs = Vec::with_capacity(bench.repeats);
    for r in 0..bench.repeats {
        let model_seed = cell_seed(bench.seed, graph.method().name(), model.architecture.name(), r);
        let split_seed = cell_seed(bench.seed, "split", "", r);
        let s = split(cohort_len, fractions, split_seed)?;
        let config = ModelConfig {
            seed: model_seed,
            ..model.clone()
        };
        let outcome = train(&config, graph, &s, train_config)?;
        let eval = evaluate(&outcome.params, &config, graph, &s.test, &outcome.label_stats)?;
        runs.push(RunResult {
            model_seed,
            split_seed,
            best_epoch: outcome.best_epoch,
            test_mae: eval.mae,
            test_r2: eval.r2,
            history: outcome.history,
        });
    }
    Ok(runs)
}

/// Builds each graph once and trains every requested cell on it. Cell
/// failures are recorded in the report instead of aborting the run.
pub fn benchmark_matrix(
    cohort: &Cohort,
    builder: &BuilderConfig,
    model: &ModelConfig,
    fractions: &SplitFractions,
    train_config: &TrainConfig,
    bench: &BenchmarkConfig,
) -> Result<BenchmarkReport> {
    bench.validate()?;
    builder.validate()?;
    model.validate()?;
    train_config.validate()?;
    fractions.validate()?;

    let mut builders: Vec<BuilderMethod> = bench.builders.clone();
    builders.dedup();
    let mut graphs = Vec::new();
    let mut summaries = Vec::new();
    for &method in &builders {
        let built = build(cohort, &BuilderConfig { method, ..builder.clone() });
        summaries.push(match &built {
            Ok(g) => GraphSummary {
                builder: method,
                homophily: homophily(g),
                edges: g.edge_count(),
                directed_edges: g.directed_edge_count(),
                degree: degree_stats(g),
                error: None,
            },
            Err(e) => GraphSummary {
                builder: method,
                homophily: None,
                edges: 0,
                directed_edges: 0,
                degree: DegreeStats {
                    mean: 0.0,
                    min: 0,
                    max: 0,
                    isolated: 0,
                },
                error: Some(e.to_string()),
            },
        });
        graphs.push(built);
    }

    let cells = bench.cells();
    let jobs = Mutex::new(cells.iter().enumerate());
    let results: Mutex<Vec<(usize, CellResult)>> = Mutex::new(Vec::with_capacity(cells.len()));
    let worker = || loop {
        let Some((slot, &(method, arch))) = jobs.lock().expect("job queue").next() else {
            break;
        };
        let g = builders.iter().position(|&b| b == method).expect("builder was built");
        let summary = &summaries[g];
        let started = Instant::now();
        let outcome = match &graphs[g] {
            Ok(graph) => {
                let config = ModelConfig {
                    architecture: arch,
                    ..model.clone()
                };
                run_cell(graph, cohort.len(), fractions, &config, train_config, bench)
            }
            Err(e) => Err(Error::Contract(format!("graph construction failed: {e}"))),
        };
        let (runs, error) = match outcome {
            Ok(runs) => (runs, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        let cell = CellResult {
            builder: method,
            model: arch,
            homophily: summary.homophily,
            edges: summary.edges,
            mean_test_mae: mean(runs.iter().map(|r| r.test_mae)),
            mean_test_r2: mean(runs.iter().filter_map(|r| r.test_r2)),
            runs,
            error,
            wall_time_secs: started.elapsed().as_secs_f64(),
        };
        results.lock().expect("results").push((slot, cell));
    };
    std::thread::scope(|scope| {
        for _ in 1..bench.threads.min(cells.len()) {
            scope.spawn(worker);
        }
        worker();
    });

    let mut results = results.into_inner().expect("results");
    results.sort_by_key(|(slot, _)| *slot);
    Ok(BenchmarkReport {
        provenance: Provenance {
            subjects: cohort.len(),
            imaging_features: cohort.imaging().cols(),
            phenotypes: cohort.schema().len(),
            split: *fractions,
            builder: builder.clone(),
            model: model.clone(),
            train: train_config.clone(),
            benchmark: bench.clone(),
        },
        graphs: summaries,
        cells: results.into_iter().map(|(_, c)| c).collect(),
    })
}

