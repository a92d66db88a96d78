//! MLP baseline and the GCN, GraphSAGE, GAT and Chebyshev regressors.
//!
//! All architectures share one skeleton: graph layer (`hidden` units, ReLU)
//! → dense layer (`fc` units, ReLU) → scalar output. The MLP replaces the
//! graph layer with a dense one.

mod checkpoint;
mod config;
mod forward;
mod layers;
mod operators;
mod params;

pub use checkpoint::{Checkpoint, LabelStats};
pub use config::{Architecture, ModelConfig};
pub use forward::{
    bind_params, forward, forward_on_tape, loss_and_gradients, predict, LossEvaluation, LossKind,
};
pub use layers::{attention_head, cheb_layer, dense_layer, gat_layer, gcn_layer, sage_layer, AttentionHead};
pub use operators::{
    attention_edges, neighbor_mean, normalize_adjacency, scaled_laplacian, AttentionEdges, Propagation,
};
pub use params::{param_layout, ModelParams};
