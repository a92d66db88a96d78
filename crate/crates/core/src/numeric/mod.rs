//! Dense and sparse tensors, reverse-mode differentiation and AdamW.

mod adamw;
mod gradcheck;
mod sparse;
mod tape;
mod tensor;

pub use adamw::{AdamWConfig, AdamWState};
pub use gradcheck::grad_check;
pub use sparse::SparseMatrix;
pub use tape::{segment_softmax_values, Tape, Var};
pub(crate) use tensor::gemm;
pub use tensor::{matmul_dense, Tensor};
