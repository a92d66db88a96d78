//! Plain-text parameter checkpoints.
//!
//! ```text
//! popgraph-checkpoint 1
//! architecture gcn
//! hidden 512
//! fc 128
//! cheb_order 3
//! heads 1
//! leaky_slope 0.2
//! seed 0
//! input_features 68
//! label_mean 63.8          (optional)
//! label_std 7.4            (optional)
//! tensor conv.weight 68 512
//! <row-major values separated by single spaces>
//! ...
//! end
//! ```
//!
//! Values are written in the shortest decimal form that parses back to the
//! identical `f64`, so a save/load cycle is exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Tensor;

use super::{ModelConfig, ModelParams};

const MAGIC: &str = "popgraph-checkpoint 1";

/// Train-set age mean and standard deviation used to standardize labels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub mean: f64,
    pub std: f64,
}

impl LabelStats {
    /// Population mean/std of `labels[indices]`; a zero spread maps to 1.
    pub fn fit(labels: &[f64], indices: &[usize]) -> Self {
        let n = indices.len().max(1) as f64;
        let mean = indices.iter().map(|&i| labels[i]).sum::<f64>() / n;
        let var = indices.iter().map(|&i| (labels[i] - mean).powi(2)).sum::<f64>() / n;
        let std = if var > 0.0 { var.sqrt() } else { 1.0 };
        LabelStats { mean, std }
    }

    pub fn standardize(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub fn destandardize(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: ModelConfig,
    pub input_features: usize,
    pub params: ModelParams,
    pub labels: Option<LabelStats>,
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        out.push_str(&format!("architecture {}\n", m.architecture));
        out.push_str(&format!("hidden {}\nfc {}\ncheb_order {}\nheads {}\n", m.hidden, m.fc, m.cheb_order, m.heads));
        out.push_str(&format!("leaky_slope {}\nseed {}\n", m.leaky_slope, m.seed));
        out.push_str(&format!("input_features {}\n", self.input_features));
        if let Some(stats) = self.labels {
            out.push_str(&format!("label_mean {}\nlabel_std {}\n", stats.mean, stats.std));
        }
        for (name, t) in self.params.names().iter().zip(self.params.tensors()) {
            let dims: Vec<String> = t.shape().iter().map(usize::to_string).collect();
            out.push_str(&format!("tensor {name} {}\n", dims.join(" ")));
            let values: Vec<String> = t.values().iter().map(f64::to_string).collect();
            out.push_str(&values.join(" "));
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().peekable();
        let err = |line: usize, column: &str, message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line + 1,
            column: column.to_string(),
            message,
        };
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(err(0, "", "not a popgraph checkpoint".into())),
        }
        let mut model = ModelConfig::default();
        let mut input_features = None;
        let (mut mean, mut std) = (None, None);
        let mut names = Vec::new();
        let mut tensors = Vec::new();
        let mut finished = false;

        while let Some((no, line)) = lines.next() {
            let mut parts = line.split_whitespace();
            let Some(key) = parts.next() else { continue };
            let rest: Vec<&str> = parts.collect();
            let single = |what: &str| -> Result<&str> {
                match rest.as_slice() {
                    [v] => Ok(*v),
                    _ => Err(err(no, what, "expected exactly one value".into())),
                }
            };
            let int = |what: &str| -> Result<usize> {
                let v = single(what)?;
                v.parse().map_err(|e| err(no, what, format!("`{v}`: {e}")))
            };
            let float = |what: &str| -> Result<f64> {
                let v = single(what)?;
                v.parse().map_err(|e| err(no, what, format!("`{v}`: {e}")))
            };
            match key {
                "architecture" => model.architecture = single(key)?.parse()?,
                "hidden" => model.hidden = int(key)?,
                "fc" => model.fc = int(key)?,
                "cheb_order" => model.cheb_order = int(key)?,
                "heads" => model.heads = int(key)?,
                "leaky_slope" => model.leaky_slope = float(key)?,
                "seed" => {
                    let v = single(key)?;
                    model.seed = v.parse().map_err(|e| err(no, key, format!("`{v}`: {e}")))?;
                }
                "input_features" => input_features = Some(int(key)?),
                "label_mean" => mean = Some(float(key)?),
                "label_std" => std = Some(float(key)?),
                "tensor" => {
                    let (name, dims) = rest
                        .split_first()
                        .ok_or_else(|| err(no, key, "missing tensor name".into()))?;
                    let shape = dims
                        .iter()
                        .map(|d| d.parse::<usize>().map_err(|e| err(no, name, format!("bad dimension `{d}`: {e}"))))
                        .collect::<Result<Vec<_>>>()?;
                    let (vno, data) = lines
                        .next()
                        .ok_or_else(|| err(no, name, "missing value line".into()))?;
                    let values = data
                        .split_whitespace()
                        .map(|v| v.parse::<f64>().map_err(|e| err(vno, name, format!("bad value `{v}`: {e}"))))
                        .collect::<Result<Vec<_>>>()?;
                    tensors.push(Tensor::new(shape, values).map_err(|e| err(vno, name, e.to_string()))?);
                    names.push(name.to_string());
                }
                "end" => {
                    finished = true;
                    break;
                }
                other => return Err(err(no, other, "unknown checkpoint key".into())),
            }
        }
        if !finished {
            return Err(err(text.lines().count(), "end", "truncated checkpoint".into()));
        }
        let input_features =
            input_features.ok_or_else(|| err(0, "input_features", "missing input feature count".into()))?;
        let labels = match (mean, std) {
            (Some(mean), Some(std)) => Some(LabelStats { mean, std }),
            (None, None) => None,
            _ => return Err(err(0, "label_std", "label_mean and label_std must appear together".into())),
        };
        model.validate()?;
        let params = ModelParams::from_parts(names, tensors)?;
        params.check_layout(&model, input_features)?;
        Ok(Checkpoint {
            model,
            input_features,
            params,
            labels,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::parse(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Architecture;
    use proptest::prelude::*;

    fn checkpoint(arch: Architecture) -> Checkpoint {
        let model = ModelConfig {
            hidden: 6,
            fc: 3,
            heads: if arch == Architecture::Gat { 2 } else { 1 },
            ..ModelConfig::new(arch)
        };
        Checkpoint {
            params: ModelParams::init(&model, 4).unwrap(),
            model,
            input_features: 4,
            labels: Some(LabelStats { mean: 63.25, std: 7.1 }),
        }
    }

    #[test]
    fn round_trips_every_architecture() {
        for arch in Architecture::ALL {
            let c = checkpoint(arch);
            let back = Checkpoint::parse(&c.to_text(), Path::new("c")).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn rejects_truncation_and_bad_shapes() {
        let text = checkpoint(Architecture::Gcn).to_text();
        let truncated = &text[..text.len() - 4];
        assert!(Checkpoint::parse(truncated, Path::new("c")).is_err());
        let reshaped = text.replacen("tensor conv.weight 4 6", "tensor conv.weight 6 4", 1);
        assert!(Checkpoint::parse(&reshaped, Path::new("c")).is_err());
        assert!(Checkpoint::parse("hello\n", Path::new("c")).is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_values_round_trip_exactly(values in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 28..=28)) {
            let mut c = checkpoint(Architecture::Mlp);
            let needed = c.params.parameter_count();
            let flat: Vec<f64> = values.iter().cycle().take(needed).copied().collect();
            c.params.set_flat(&flat).unwrap();
            let back = Checkpoint::parse(&c.to_text(), Path::new("c")).unwrap();
            let bits = |p: &ModelParams| p.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back.params), bits(&c.params));
        }
    }
}
