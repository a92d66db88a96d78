use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PopulationGraph;
use crate::numeric::{Tape, Tensor, Var};

use super::layers::{cheb_layer, dense_layer, gat_layer, gcn_layer, sage_layer, AttentionHead};
use super::params::head_suffix;
use super::{Architecture, ModelConfig, ModelParams, Propagation};

/// Training objective on standardized labels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    #[default]
    Mse,
    Mae,
}

/// Records every parameter as a trainable leaf, in parameter order.
pub fn bind_params(tape: &mut Tape, params: &ModelParams) -> Vec<Var> {
    params.tensors().iter().map(|t| tape.leaf(t.clone())).collect()
}

struct Bound<'a> {
    params: &'a ModelParams,
    vars: &'a [Var],
}

impl Bound<'_> {
    fn get(&self, name: &str) -> Result<Var> {
        self.params
            .index(name)
            .map(|i| self.vars[i])
            .ok_or_else(|| Error::config("model", format!("missing parameter `{name}`")))
    }
}

/// Records the forward pass; returns the `N × 1` prediction node.
pub fn forward_on_tape(
    tape: &mut Tape,
    config: &ModelConfig,
    params: &ModelParams,
    vars: &[Var],
    propagation: &Propagation,
    features: Var,
) -> Result<Var> {
    let p = Bound { params, vars };
    let bias = p.get("conv.bias")?;
    let hidden = match (config.architecture, propagation) {
        (Architecture::Mlp, _) => dense_layer(tape, features, p.get("conv.weight")?, bias)?,
        (Architecture::Gcn, Propagation::Gcn(adj)) => gcn_layer(tape, features, adj, p.get("conv.weight")?, bias)?,
        (Architecture::Sage, Propagation::Sage(mean)) => sage_layer(
            tape,
            features,
            mean,
            p.get("conv.weight")?,
            p.get("conv.weight_neigh")?,
            bias,
        )?,
        (Architecture::Gat, Propagation::Gat(edges)) => {
            let heads = (0..config.heads)
                .map(|h| {
                    let s = head_suffix(config, h);
                    Ok(AttentionHead {
                        weight: p.get(&format!("conv.weight{s}"))?,
                        att_dst: p.get(&format!("conv.att_dst{s}"))?,
                        att_src: p.get(&format!("conv.att_src{s}"))?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            gat_layer(tape, features, edges, &heads, bias, config.leaky_slope)?
        }
        (Architecture::Cheb, Propagation::Cheb(lap)) => {
            let mut weights = vec![p.get("conv.weight")?];
            for k in 1..config.cheb_order {
                weights.push(p.get(&format!("conv.weight_{k}"))?);
            }
            cheb_layer(tape, features, lap, &weights, bias)?
        }
        (arch, _) => {
            return Err(Error::Contract(format!("graph operator does not match architecture {arch}")));
        }
    };
    let fc = dense_layer(tape, hidden, p.get("fc.weight")?, p.get("fc.bias")?)?;
    let out = tape.matmul(fc, p.get("head.weight")?)?;
    tape.add_bias(out, p.get("head.bias")?)
}

/// Predictions (`N × 1`) of `params` on `graph`.
pub fn forward(config: &ModelConfig, params: &ModelParams, graph: &PopulationGraph) -> Result<Tensor> {
    let propagation = Propagation::new(config.architecture, graph)?;
    predict(config, params, &propagation, graph.features())
}

pub fn predict(
    config: &ModelConfig,
    params: &ModelParams,
    propagation: &Propagation,
    features: &Tensor,
) -> Result<Tensor> {
    params.check_layout(config, features.cols())?;
    let mut tape = Tape::new();
    let vars: Vec<Var> = params.tensors().iter().map(|t| tape.constant(t.clone())).collect();
    let x = tape.constant(features.clone());
    let out = forward_on_tape(&mut tape, config, params, &vars, propagation, x)?;
    Ok(tape.value(out).clone())
}

/// Loss over `indices` and its gradient for every parameter, plus the
/// full-graph predictions the loss was computed from.
pub struct LossEvaluation {
    pub loss: f64,
    pub grads: Vec<Vec<f64>>,
    pub predictions: Tensor,
}

pub fn loss_and_gradients(
    config: &ModelConfig,
    params: &ModelParams,
    propagation: &Propagation,
    features: &Tensor,
    targets: &Tensor,
    indices: &Arc<[usize]>,
    loss: LossKind,
) -> Result<LossEvaluation> {
    let mut tape = Tape::new();
    let vars = bind_params(&mut tape, params);
    let x = tape.constant(features.clone());
    let pred = forward_on_tape(&mut tape, config, params, &vars, propagation, x)?;
    let picked = tape.select_rows(pred, indices.clone())?;
    let target = tape.constant(targets.clone());
    let value = match loss {
        LossKind::Mse => tape.mse_loss(picked, target)?,
        LossKind::Mae => tape.mae_loss(picked, target)?,
    };
    tape.backward(value)?;
    let grads = vars
        .iter()
        .zip(params.tensors())
        .map(|(&v, t)| tape.grad(v).map_or_else(|| vec![0.0; t.len()], <[f64]>::to_vec))
        .collect();
    Ok(LossEvaluation {
        loss: tape.value(value).values()[0],
        grads,
        predictions: tape.value(pred).clone(),
    })
}
