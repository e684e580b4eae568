//! Networks, losses and optimizers for regressing rotations.
//!
//! [`tape`] is a small reverse-mode autodiff engine over row-batched
//! matrices. It knows the dense layer, ReLU, the SO(3) projections and the
//! metrics, which is all the experiments need.

pub mod loss;
pub mod mlp;
pub mod optim;
pub mod tape;
pub mod train;

pub use loss::{LossSpec, Picking, Projection, TargetSpace};
pub use mlp::{Activation, Layer, Mlp};
pub use optim::{adam_step, gd_momentum_step, AdamParams, Optimizer, OptimizerKind};
pub use tape::{Grads, Matrix, RowMap, Tape, Var};
pub use train::{evaluate, train, train_step, Dataset, History, QuatFlip, TrainConfig};
