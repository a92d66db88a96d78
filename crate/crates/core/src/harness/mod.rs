//! Training, evaluation, the builder × model benchmark, graph export and
//! experiment configuration.

mod benchmark;
mod config;
mod export;
mod layout;
mod train;

pub use benchmark::{
    benchmark_matrix, cell_seed, BenchmarkConfig, BenchmarkReport, CellResult, GraphSummary, Provenance, RunResult,
};
pub use config::{apply_override, ExperimentConfig, ReportConfig};
pub use export::{
    export_graph, nodes_path, read_edge_csv, render_dot, render_graphml, write_edge_csv, EdgeList, ExportFormat,
};
pub use layout::{layout, write_layout_csv};
pub use train::{evaluate, predict_years, regression_metrics, train, Evaluation, History, TrainConfig, TrainOutcome};
