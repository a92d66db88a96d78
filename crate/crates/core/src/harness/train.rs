use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cohort::Split;
use crate::error::{Error, Result};
use crate::graph::PopulationGraph;
use crate::models::{loss_and_gradients, predict, LabelStats, LossKind, ModelConfig, ModelParams, Propagation};
use crate::numeric::{AdamWConfig, AdamWState, Tensor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub weight_decay: f64,
    pub loss: LossKind,
    /// Seeds the train/validation/test split.
    pub seed: u64,
    /// Label standardization; fitted on the training indices when absent.
    pub label_stats: Option<LabelStats>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            epochs: 150,
            weight_decay: 0.01,
            loss: LossKind::Mse,
            seed: 0,
            label_stats: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("train.epochs", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("train.learning_rate", "must be positive"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::config("train.weight_decay", "must be non-negative"));
        }
        if let Some(stats) = self.label_stats {
            if !(stats.std > 0.0 && stats.mean.is_finite()) {
                return Err(Error::config("train.label_stats", "std must be positive"));
            }
        }
        Ok(())
    }

    pub fn adamw(&self) -> AdamWConfig {
        AdamWConfig {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            ..AdamWConfig::default()
        }
    }
}

/// Per-epoch curves. `val_mae[e]` is the validation MAE (years) of the
/// parameters after optimizer step `e + 1`; `train_loss[e]` is the loss
/// that step descended.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub train_loss: Vec<f64>,
    pub val_mae: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: History,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_mae: f64,
    pub label_stats: LabelStats,
}

fn check_split(split: &Split, n: usize) -> Result<()> {
    let all = split.train.iter().chain(&split.val).chain(&split.test);
    if let Some(&bad) = all.clone().find(|&&i| i >= n) {
        return Err(Error::config("split", format!("index {bad} out of range for {n} nodes")));
    }
    if split.train.is_empty() || split.val.is_empty() {
        return Err(Error::config("split", "train and validation sets must be non-empty"));
    }
    Ok(())
}

fn mae_years(pred: &Tensor, labels: &[f64], indices: &[usize], stats: &LabelStats) -> f64 {
    let total: f64 = indices
        .iter()
        .map(|&i| (stats.destandardize(pred.values()[i]) - labels[i]).abs())
        .sum();
    total / indices.len() as f64
}

/// Full-batch transductive training with best-validation model selection.
pub fn train(model: &ModelConfig, graph: &PopulationGraph, split: &Split, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    model.validate()?;
    check_split(split, graph.node_count())?;
    let labels = graph.labels();
    let stats = config.label_stats.unwrap_or_else(|| LabelStats::fit(labels, &split.train));
    let indices: Arc<[usize]> = split.train.clone().into();
    let targets = Tensor::new(
        vec![indices.len(), 1],
        indices.iter().map(|&i| stats.standardize(labels[i])).collect(),
    )?;
    let propagation = Propagation::new(model.architecture, graph)?;
    let features = graph.features();

    let mut params = ModelParams::init(model, features.cols())?;
    let mut optimizer = AdamWState::new(config.adamw(), params.tensors());
    let mut history = History::default();
    let mut best: Option<(usize, f64, ModelParams)> = None;

    for epoch in 0..=config.epochs {
        if epoch == config.epochs {
            let pred = predict(model, &params, &propagation, features)?;
            record(&mut best, epoch, mae_years(&pred, labels, &split.val, &stats), &params, &mut history);
            break;
        }
        let eval = loss_and_gradients(model, &params, &propagation, features, &targets, &indices, config.loss)?;
        if epoch > 0 {
            record(&mut best, epoch, mae_years(&eval.predictions, labels, &split.val, &stats), &params, &mut history);
        }
        if !eval.loss.is_finite() {
            return Err(Error::Numeric(format!("non-finite training loss at epoch {}", epoch + 1)));
        }
        history.train_loss.push(eval.loss);
        let grads: Vec<&[f64]> = eval.grads.iter().map(Vec::as_slice).collect();
        optimizer
            .step(params.tensors_mut(), &grads)
            .map_err(|e| Error::Numeric(format!("epoch {}: {e}", epoch + 1)))?;
    }

    let (best_epoch, best_val_mae, params) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        params,
        history,
        best_epoch,
        best_val_mae,
        label_stats: stats,
    })
}

fn record(
    best: &mut Option<(usize, f64, ModelParams)>,
    epoch: usize,
    val_mae: f64,
    params: &ModelParams,
    history: &mut History,
) {
    history.val_mae.push(val_mae);
    let better = match best {
        None => true,
        Some((_, b, _)) => val_mae < *b || (b.is_nan() && !val_mae.is_nan()),
    };
    if better {
        *best = Some((epoch, val_mae, params.clone()));
    }
}

/// MAE in years and R², the latter absent when the labels are constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub mae: f64,
    pub r2: Option<f64>,
}

pub fn regression_metrics(predicted: &[f64], actual: &[f64]) -> Result<Evaluation> {
    if predicted.len() != actual.len() || actual.is_empty() {
        return Err(Error::Shape {
            op: "regression_metrics",
            left: vec![predicted.len()],
            right: vec![actual.len()],
        });
    }
    let n = actual.len() as f64;
    let mae = predicted.iter().zip(actual).map(|(p, y)| (p - y).abs()).sum::<f64>() / n;
    let mean = actual.iter().sum::<f64>() / n;
    let total: f64 = actual.iter().map(|y| (y - mean).powi(2)).sum();
    let residual: f64 = predicted.iter().zip(actual).map(|(p, y)| (p - y).powi(2)).sum();
    let r2 = (total > 0.0).then(|| 1.0 - residual / total);
    Ok(Evaluation { mae, r2 })
}

/// De-standardized predictions of `params` on the nodes in `indices`.
pub fn predict_years(
    params: &ModelParams,
    model: &ModelConfig,
    graph: &PopulationGraph,
    indices: &[usize],
    stats: &LabelStats,
) -> Result<Vec<f64>> {
    let propagation = Propagation::new(model.architecture, graph)?;
    let pred = predict(model, params, &propagation, graph.features())?;
    indices
        .iter()
        .map(|&i| {
            pred.values()
                .get(i)
                .map(|&z| stats.destandardize(z))
                .ok_or_else(|| Error::config("indices", format!("node {i} out of range")))
        })
        .collect()
}

pub fn evaluate(
    params: &ModelParams,
    model: &ModelConfig,
    graph: &PopulationGraph,
    indices: &[usize],
    stats: &LabelStats,
) -> Result<Evaluation> {
    let predicted = predict_years(params, model, graph, indices, stats)?;
    let actual: Vec<f64> = indices.iter().map(|&i| graph.labels()[i]).collect();
    regression_metrics(&predicted, &actual)
}
