use std::sync::Arc;

use super::{renormalize, Mitigator};
use crate::nn::GruNetwork;
use crate::Result;

/// The trained GRU network used as a mitigation method.
#[derive(Debug, Clone)]
pub struct Proposed {
    model: Arc<GruNetwork>,
}

impl Proposed {
    pub fn new(model: Arc<GruNetwork>) -> Self {
        Self { model }
    }
}

impl Mitigator for Proposed {
    fn name(&self) -> &'static str {
        "proposed"
    }

    fn label(&self) -> &'static str {
        "residual bidirectional GRU"
    }

    fn mitigate(&self, frame: &[f64]) -> Result<Vec<f64>> {
        renormalize(self.model.forward(frame)?)
    }

    fn mitigate_batch(&self, frames: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        self.model
            .forward_batch(frames)?
            .into_iter()
            .map(renormalize)
            .collect()
    }
}
