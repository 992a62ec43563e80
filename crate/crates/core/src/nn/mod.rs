//! Residual bidirectional GRU trained from scratch.
//!
//! Sequences are processed in batches laid out time-major as `(N, B, D)`
//! arrays so that each recurrent step is a single matrix product over the
//! whole batch.

mod cell;
mod layer;
mod loss;
mod network;
mod optim;

pub use cell::{sigmoid, CellParams, GateCache};
pub use layer::{LayerParams, LayerTrace};
pub use loss::{mse_loss, mse_loss_grad};
pub use network::{Architecture, ForwardTrace, Gradients, GruNetwork, Mode, ARCH_TAG, MERGE_MODE};
pub use optim::{clip_global_norm, Adam, AdamConfig, TrainState};
