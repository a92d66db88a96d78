use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::Tensor;

use super::{Architecture, ModelConfig};

/// Named parameter tensors in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

pub(crate) fn head_suffix(config: &ModelConfig, h: usize) -> String {
    if config.heads == 1 {
        String::new()
    } else {
        format!(".{h}")
    }
}

/// Parameter names and shapes for `config` with `input` node features.
pub fn param_layout(config: &ModelConfig, input: usize) -> Vec<(String, Vec<usize>)> {
    let (h, f) = (config.hidden, config.fc);
    let mut layout: Vec<(String, Vec<usize>)> = Vec::new();
    match config.architecture {
        Architecture::Mlp | Architecture::Gcn => {
            layout.push(("conv.weight".into(), vec![input, h]));
        }
        Architecture::Sage => {
            layout.push(("conv.weight".into(), vec![input, h]));
            layout.push(("conv.weight_neigh".into(), vec![input, h]));
        }
        Architecture::Gat => {
            let per_head = h / config.heads;
            for head in 0..config.heads {
                let s = head_suffix(config, head);
                layout.push((format!("conv.weight{s}"), vec![input, per_head]));
                layout.push((format!("conv.att_dst{s}"), vec![per_head, 1]));
                layout.push((format!("conv.att_src{s}"), vec![per_head, 1]));
            }
        }
        Architecture::Cheb => {
            layout.push(("conv.weight".into(), vec![input, h]));
            for k in 1..config.cheb_order {
                layout.push((format!("conv.weight_{k}"), vec![input, h]));
            }
        }
    }
    layout.push(("conv.bias".into(), vec![h]));
    layout.push(("fc.weight".into(), vec![h, f]));
    layout.push(("fc.bias".into(), vec![f]));
    layout.push(("head.weight".into(), vec![f, 1]));
    layout.push(("head.bias".into(), vec![1]));
    layout
}

impl ModelParams {
    /// Glorot-uniform weights and zero biases from `config.seed`.
    pub fn init(config: &ModelConfig, input: usize) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut names = Vec::new();
        let mut tensors = Vec::new();
        for (name, shape) in param_layout(config, input) {
            let tensor = if shape.len() == 1 {
                Tensor::zeros(shape)
            } else {
                let limit = (6.0 / (shape[0] + shape[1]) as f64).sqrt();
                let len = shape[0] * shape[1];
                let values = (0..len).map(|_| rng.random_range(-limit..=limit)).collect();
                Tensor::new(shape, values)?
            };
            names.push(name);
            tensors.push(tensor);
        }
        Ok(ModelParams { names, tensors })
    }

    pub fn from_parts(names: Vec<String>, tensors: Vec<Tensor>) -> Result<Self> {
        if names.len() != tensors.len() {
            return Err(Error::Contract("parameter names and tensors differ in count".into()));
        }
        Ok(ModelParams { names, tensors })
    }

    /// Fails unless names and shapes match [`param_layout`].
    pub fn check_layout(&self, config: &ModelConfig, input: usize) -> Result<()> {
        let layout = param_layout(config, input);
        if layout.len() != self.names.len() {
            return Err(Error::config(
                "model",
                format!("expected {} parameter tensors, found {}", layout.len(), self.names.len()),
            ));
        }
        for ((name, shape), (have, t)) in layout.iter().zip(self.names.iter().zip(&self.tensors)) {
            if name != have || shape.as_slice() != t.shape() {
                return Err(Error::config(
                    have,
                    format!("expected `{name}` with shape {shape:?}, found shape {:?}", t.shape()),
                ));
            }
        }
        Ok(())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index(name).map(|i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index(name).map(|i| &mut self.tensors[i])
    }

    pub(crate) fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    /// All values concatenated in parameter order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors.iter().flat_map(|t| t.values().iter().copied()).collect()
    }

    /// Overwrites all values from a buffer laid out as [`to_flat`](Self::to_flat).
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::Shape {
                op: "set_flat",
                left: vec![self.parameter_count()],
                right: vec![flat.len()],
            });
        }
        let mut offset = 0;
        for t in &mut self.tensors {
            let len = t.len();
            t.values_mut().copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glorot_bounds_and_zero_bias() {
        let config = ModelConfig {
            hidden: 16,
            fc: 8,
            ..ModelConfig::new(Architecture::Gat)
        };
        let p = ModelParams::init(&config, 5).unwrap();
        let w = p.get("conv.weight").unwrap();
        let limit = (6.0f64 / 21.0).sqrt();
        assert!(w.values().iter().all(|v| v.abs() <= limit));
        assert!(p.get("conv.bias").unwrap().values().iter().all(|&v| v == 0.0));
        assert!(p.check_layout(&config, 5).is_ok());
        assert!(p.check_layout(&config, 6).is_err());
    }

    #[test]
    fn layouts_per_architecture() {
        let names = |arch| {
            param_layout(&ModelConfig::new(arch), 3)
                .into_iter()
                .map(|(n, _)| n)
                .collect::<Vec<_>>()
        };
        assert!(names(Architecture::Sage).contains(&"conv.weight_neigh".to_string()));
        assert!(names(Architecture::Cheb).contains(&"conv.weight_2".to_string()));
        assert!(!names(Architecture::Cheb).contains(&"conv.weight_3".to_string()));
        let multi = ModelConfig {
            heads: 2,
            ..ModelConfig::new(Architecture::Gat)
        };
        let layout = param_layout(&multi, 3);
        assert!(layout.iter().any(|(n, s)| n == "conv.att_src.1" && s == &vec![256, 1]));
    }

    #[test]
    fn flat_round_trip() {
        let config = ModelConfig {
            hidden: 4,
            fc: 3,
            ..ModelConfig::default()
        };
        let mut p = ModelParams::init(&config, 2).unwrap();
        let flat: Vec<f64> = (0..p.parameter_count()).map(|i| i as f64).collect();
        p.set_flat(&flat).unwrap();
        assert_eq!(p.to_flat(), flat);
        assert!(p.set_flat(&flat[1..]).is_err());
    }
}
