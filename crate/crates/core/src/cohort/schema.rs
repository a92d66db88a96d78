use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhenotypeKind {
    Categorical,
    Continuous,
}

impl fmt::Display for PhenotypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhenotypeKind::Categorical => "categorical",
            PhenotypeKind::Continuous => "continuous",
        })
    }
}

impl FromStr for PhenotypeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "categorical" => Ok(PhenotypeKind::Categorical),
            "continuous" => Ok(PhenotypeKind::Continuous),
            other => Err(format!("unknown phenotype kind `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phenotype {
    pub name: String,
    pub kind: PhenotypeKind,
}

/// Ordered non-imaging phenotype list plus the imaging feature count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhenotypeSchema {
    phenotypes: Vec<Phenotype>,
    imaging_features: usize,
}

/// Reserved sidecar key holding the imaging feature count.
pub const IMAGING_KEY: &str = "imaging_features";

impl PhenotypeSchema {
    pub fn new(phenotypes: Vec<Phenotype>, imaging_features: usize) -> Result<Self> {
        if phenotypes.is_empty() {
            return Err(Error::config("schema", "at least one non-imaging phenotype is required"));
        }
        if imaging_features == 0 {
            return Err(Error::config(IMAGING_KEY, "must be at least 1"));
        }
        let mut seen = HashSet::new();
        for p in &phenotypes {
            if p.name == "age" || p.name == IMAGING_KEY || p.name.starts_with("img_") {
                return Err(Error::config(&p.name, "phenotype name collides with a reserved column"));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(Error::config(&p.name, "duplicate phenotype name"));
            }
        }
        Ok(PhenotypeSchema {
            phenotypes,
            imaging_features,
        })
    }

    pub fn phenotypes(&self) -> &[Phenotype] {
        &self.phenotypes
    }

    /// Number of non-imaging phenotypes (K).
    pub fn len(&self) -> usize {
        self.phenotypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phenotypes.is_empty()
    }

    /// Number of imaging features (M).
    pub fn imaging_features(&self) -> usize {
        self.imaging_features
    }

    pub fn kind(&self, k: usize) -> PhenotypeKind {
        self.phenotypes[k].kind
    }

    pub fn imaging_column(i: usize) -> String {
        format!("img_{i}")
    }

    pub fn to_sidecar(&self) -> String {
        let mut out = String::from("# phenotype schema\n");
        out.push_str(&format!("{IMAGING_KEY} = {}\n", self.imaging_features));
        for p in &self.phenotypes {
            out.push_str(&format!("{} = {}\n", p.name, p.kind));
        }
        out
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse_sidecar(text: &str, path: &Path) -> Result<Self> {
        let mut imaging = None;
        let mut phenotypes = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |column: &str, message: String| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                column: column.to_string(),
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err("", "expected `name = kind`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if key == IMAGING_KEY {
                let m = value
                    .parse::<usize>()
                    .map_err(|e| parse_err(key, format!("invalid count `{value}`: {e}")))?;
                imaging = Some(m);
            } else {
                let kind = value.parse().map_err(|e: String| parse_err(key, e))?;
                phenotypes.push(Phenotype {
                    name: key.to_string(),
                    kind,
                });
            }
        }
        let imaging = imaging.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            column: IMAGING_KEY.to_string(),
            message: "missing imaging feature count".into(),
        })?;
        PhenotypeSchema::new(phenotypes, imaging)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PhenotypeSchema::parse_sidecar(&text, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_sidecar()).map_err(|e| Error::io(path, e))
    }
}
