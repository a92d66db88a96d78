use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::builders::BuilderConfig;
use crate::cohort::{SplitFractions, SyntheticConfig};
use crate::error::{Error, Result};
use crate::models::ModelConfig;

use super::benchmark::BenchmarkConfig;
use super::train::TrainConfig;

/// Output locations and export options.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub directory: PathBuf,
    pub include_labels: bool,
    pub layout_iterations: usize,
    pub layout_seed: u64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            directory: PathBuf::from("report"),
            include_labels: true,
            layout_iterations: 100,
            layout_seed: 0,
        }
    }
}

/// Every tunable of a run, one TOML section per component:
///
/// ```toml
/// [cohort]      # synthetic cohort generator
/// subjects = 1000
/// [split]
/// train = 0.75
/// [builder]
/// method = "knn-imaging"
/// [model]
/// architecture = "gcn"
/// [train]
/// epochs = 150
/// [benchmark]
/// repeats = 3
/// [report]
/// directory = "report"
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub cohort: SyntheticConfig,
    pub split: SplitFractions,
    pub builder: BuilderConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub benchmark: BenchmarkConfig,
    pub report: ReportConfig,
}

const SECTIONS: [&str; 7] = ["cohort", "split", "builder", "model", "train", "benchmark", "report"];

fn section<T: DeserializeOwned + Default>(table: &Table, name: &str) -> Result<T> {
    match table.get(name) {
        None => Ok(T::default()),
        Some(value) => value
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(name, e.message().trim().to_string())),
    }
}

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a bare string.
fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `section.key=value` (keys may nest further) to a raw table.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like section.key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.len() < 2 || path.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key.trim(), "override key must look like section.key"));
    }
    if !SECTIONS.contains(&path[0]) {
        return Err(Error::config(path[0], "unknown config section"));
    }
    let mut cursor = table;
    for part in &path[..path.len() - 1] {
        let entry = cursor.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key.trim(), format!("`{part}` is not a section")))?;
    }
    cursor.insert(path[path.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl ExperimentConfig {
    pub fn from_table(table: &Table) -> Result<Self> {
        if let Some(unknown) = table.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(Error::config(unknown, "unknown config section"));
        }
        let config = ExperimentConfig {
            cohort: section(table, "cohort")?,
            split: section(table, "split")?,
            builder: section(table, "builder")?,
            model: section(table, "model")?,
            train: section(table, "train")?,
            benchmark: section(table, "benchmark")?,
            report: section(table, "report")?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        ExperimentConfig::from_table(&parse_table(text, path)?)
    }

    /// Reads `path` (if any), applies the overrides in order and validates.
    pub fn resolve(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                parse_table(&text, p)?
            }
            None => Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        ExperimentConfig::from_table(&table)
    }

    pub fn validate(&self) -> Result<()> {
        self.cohort.validate().map_err(|e| match e {
            Error::Config { field, reason } => Error::config(format!("cohort.{field}"), reason),
            other => other,
        })?;
        self.split.validate()?;
        self.builder.validate()?;
        self.model.validate()?;
        self.train.validate()?;
        self.benchmark.validate()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }
}

fn parse_table(text: &str, path: &Path) -> Result<Table> {
    text.parse::<Table>().map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| {
                let before = &text[..s.start.min(text.len())];
                (before.matches('\n').count() + 1, before.rsplit('\n').next().map_or(0, str::len) + 1)
            })
            .unwrap_or((0, 0));
        Error::Parse {
            path: path.to_path_buf(),
            line,
            column: column.to_string(),
            message: e.message().trim().to_string(),
        }
    })
}
