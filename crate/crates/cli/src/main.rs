use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use popgraph_core::builders::build;
use popgraph_core::cohort::{generate_synthetic, load_cohort, sidecar_path, split, write_cohort, Cohort, PhenotypeSchema};
use popgraph_core::harness::{
    benchmark_matrix, evaluate, export_graph, layout, read_edge_csv, train, write_edge_csv, write_layout_csv,
    ExperimentConfig, ExportFormat,
};
use popgraph_core::metrics::HomophilyReport;
use popgraph_core::models::{Architecture, Checkpoint};
use popgraph_core::{BuilderMethod, PopulationGraph};

/// Population-graph construction and GNN brain-age regression.
#[derive(Parser, Debug)]
#[command(name = "popgraph", version)]
struct Cli {
    /// TOML config file with [cohort], [split], [builder], [model], [train], [benchmark] and [report] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config value, e.g. `--set train.epochs=20`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic cohort CSV and its schema sidecar.
    Generate {
        #[arg(long)]
        out: PathBuf,
        /// Shorthand for `--set cohort.seed=N`.
        #[arg(long)]
        seed: Option<u64>,
        /// Shorthand for `--set cohort.subjects=N`.
        #[arg(long)]
        subjects: Option<usize>,
    },
    /// Build a population graph and write it as an edge CSV.
    BuildGraph {
        #[command(flatten)]
        input: CohortArgs,
        /// Shorthand for `--set builder.method=M`.
        #[arg(long)]
        method: Option<BuilderMethod>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model and write its checkpoint and metrics.
    Train {
        #[command(flatten)]
        input: GraphArgs,
        /// Shorthand for `--set model.architecture=A`.
        #[arg(long)]
        model: Option<Architecture>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the builder × model matrix and write a text and JSON report.
    Benchmark {
        #[command(flatten)]
        input: CohortArgs,
        /// Defaults to `report.directory`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write a graph as edge-csv, graphml or dot.
    Export {
        #[command(flatten)]
        input: GraphArgs,
        #[arg(long, default_value = "graphml")]
        format: ExportFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute a force-directed layout and write `node,x,y`.
    Layout {
        #[command(flatten)]
        input: GraphArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct CohortArgs {
    /// Cohort CSV.
    #[arg(long)]
    cohort: PathBuf,
    /// Schema sidecar; defaults to the cohort path with a `.schema` extension.
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[command(flatten)]
    cohort: CohortArgs,
    /// Edge CSV from `build-graph`; built from the config when omitted.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Builder that made (or should make) the graph; shorthand for `--set builder.method=M`.
    #[arg(long)]
    method: Option<BuilderMethod>,
}

impl GraphArgs {
    fn overrides(&self) -> Vec<String> {
        self.method.iter().map(|m| format!("builder.method={m}")).collect()
    }
}

fn resolve(cli: &Cli, extra: &[String]) -> Result<ExperimentConfig> {
    let mut overrides = cli.overrides.clone();
    overrides.extend_from_slice(extra);
    let config = ExperimentConfig::resolve(cli.config.as_deref(), &overrides)?;
    println!("# resolved config");
    print!("{}", config.to_toml());
    Ok(config)
}

fn load(args: &CohortArgs) -> Result<Cohort> {
    let schema_path = args.schema.clone().unwrap_or_else(|| sidecar_path(&args.cohort));
    let schema = PhenotypeSchema::load(&schema_path)?;
    Ok(load_cohort(&args.cohort, &schema)?.normalize())
}

fn load_graph(args: &GraphArgs, config: &ExperimentConfig) -> Result<(Cohort, PopulationGraph)> {
    let cohort = load(&args.cohort)?;
    let graph = match &args.graph {
        Some(path) => {
            let list = read_edge_csv(path)?;
            let (x, y) = (cohort.imaging().clone(), cohort.ages().to_vec());
            let method = config.builder.method;
            match list.weights {
                Some(w) => PopulationGraph::with_weights(x, y, list.edges.into_iter().zip(w).collect(), method)?,
                None => PopulationGraph::new(x, y, list.edges, method)?,
            }
        }
        None => build(&cohort, &config.builder)?,
    };
    Ok((cohort, graph))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate { out, seed, subjects } => {
            let mut extra = Vec::new();
            extra.extend(seed.map(|s| format!("cohort.seed={s}")));
            extra.extend(subjects.map(|n| format!("cohort.subjects={n}")));
            let config = resolve(cli, &extra)?;
            println!("seed: {}", config.cohort.seed);
            let cohort = generate_synthetic(&config.cohort)?;
            write_cohort(out, &cohort)?;
            cohort.schema().save(&sidecar_path(out))?;
            println!("wrote {} subjects to {}", cohort.len(), out.display());
        }
        Command::BuildGraph { input, method, out } => {
            let extra: Vec<String> = method.iter().map(|m| format!("builder.method={m}")).collect();
            let config = resolve(cli, &extra)?;
            println!("seed: {}", config.builder.seed);
            let cohort = load(input)?;
            let graph = build(&cohort, &config.builder)?;
            write_edge_csv(&graph, out, config.report.include_labels)?;
            let report = HomophilyReport::of(&graph);
            let budget = config.builder.budget_for(cohort.len());
            println!(
                "{}: {} edges ({} directed, budget {:.0}-{:.0}), homophily {}, mean degree {:.2}, isolated {}",
                graph.method(),
                report.edges,
                graph.directed_edge_count(),
                budget.min,
                budget.max,
                report.homophily.map_or("-".into(), |h| format!("{h:.4}")),
                report.degree.mean,
                report.degree.isolated
            );
        }
        Command::Train { input, model, out_dir } => {
            let mut extra = input.overrides();
            extra.extend(model.iter().map(|m| format!("model.architecture={m}")));
            let config = resolve(cli, &extra)?;
            println!("seed: model {} split {}", config.model.seed, config.train.seed);
            let (cohort, graph) = load_graph(input, &config)?;
            let s = split(cohort.len(), &config.split, config.train.seed)?;
            let outcome = train(&config.model, &graph, &s, &config.train)?;
            let test = evaluate(&outcome.params, &config.model, &graph, &s.test, &outcome.label_stats)?;
            std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            Checkpoint {
                model: config.model.clone(),
                input_features: graph.features().cols(),
                params: outcome.params,
                labels: Some(outcome.label_stats),
            }
            .save(&out_dir.join("checkpoint.txt"))?;
            let metrics = json!({
                "builder": graph.method(),
                "model": config.model.architecture,
                "best_epoch": outcome.best_epoch,
                "best_val_mae": outcome.best_val_mae,
                "test_mae": test.mae,
                "test_r2": test.r2,
                "history": outcome.history,
            });
            write(&out_dir.join("metrics.json"), &serde_json::to_string_pretty(&metrics)?)?;
            println!(
                "{} on {}: best epoch {}, test MAE {:.3} years, R2 {}",
                config.model.architecture,
                graph.method(),
                outcome.best_epoch,
                test.mae,
                test.r2.map_or("-".into(), |r| format!("{r:.3}"))
            );
        }
        Command::Benchmark { input, out_dir } => {
            let config = resolve(cli, &[])?;
            println!("seed: {}", config.benchmark.seed);
            let cohort = load(input)?;
            let report = benchmark_matrix(
                &cohort,
                &config.builder,
                &config.model,
                &config.split,
                &config.train,
                &config.benchmark,
            )?;
            let dir = out_dir.clone().unwrap_or_else(|| config.report.directory.clone());
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let table = report.to_table();
            write(&dir.join("report.txt"), &table)?;
            write(&dir.join("report.json"), &report.to_json())?;
            print!("{table}");
            for cell in &report.cells {
                eprintln!("{} × {}: {:.1}s", cell.builder, cell.model, cell.wall_time_secs);
            }
            println!("wrote {}", dir.display());
        }
        Command::Export { input, format, out } => {
            let config = resolve(cli, &input.overrides())?;
            println!("seed: {}", config.builder.seed);
            let (_, graph) = load_graph(input, &config)?;
            for file in export_graph(&graph, *format, config.report.include_labels, out)? {
                println!("wrote {}", file.display());
            }
        }
        Command::Layout { input, out } => {
            let config = resolve(cli, &input.overrides())?;
            println!("seed: {}", config.report.layout_seed);
            let (_, graph) = load_graph(input, &config)?;
            let coords = layout(&graph, config.report.layout_iterations, config.report.layout_seed);
            write_layout_csv(&coords, out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<popgraph_core::Error>() {
        Some(popgraph_core::Error::Numeric(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
