//! Interference mitigation strategies.
//!
//! Every method implements [`Mitigator`] and is built by name through a
//! [`MethodRegistry`]. The built-in registry knows `none`, `tdt`, `envelope`
//! and `proposed`.

mod envelope;
mod proposed;
mod registry;
mod tdt;

pub use envelope::{sliding_rms, Envelope, ENVELOPE_EPS};
pub use proposed::Proposed;
pub use registry::{MethodContext, MethodFactory, MethodRegistry};
pub use tdt::{robust_scale, Tdt};


use serde::{Deserialize, Serialize};

use crate::radar::normalize;
use crate::{Error, Result};

/// A time-domain interference mitigation method applied to one frame.
///
/// Outputs are unit-energy, or all-zero when nothing survives.
pub trait Mitigator: Send + Sync {
    /// Registry name, as accepted on the command line.
    fn name(&self) -> &'static str;

    /// Human-readable name used in reports.
    fn label(&self) -> &'static str {
        self.name()
    }

    fn mitigate(&self, frame: &[f64]) -> Result<Vec<f64>>;

    fn mitigate_batch(&self, frames: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        frames.iter().map(|f| self.mitigate(f)).collect()
    }
}

/// Leaves the frame untouched.
#[derive(Debug, Clone, Copy, Default)]
pub struct Passthrough;

impl Mitigator for Passthrough {
    fn name(&self) -> &'static str {
        "none"
    }

    fn mitigate(&self, frame: &[f64]) -> Result<Vec<f64>> {
        Ok(frame.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Replacement {
    #[default]
    Zero,
    LinearInterpolate,
}

/// Parameters of the classical methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MitigationConfig {
    pub tdt_beta: f64,
    pub tdt_replace: Replacement,
    pub envelope_window: usize,
}

impl Default for MitigationConfig {
    fn default() -> Self {
        Self {
            tdt_beta: 3.0,
            tdt_replace: Replacement::Zero,
            envelope_window: 31,
        }
    }
}

impl MitigationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tdt_beta.is_finite() && self.tdt_beta > 0.0) {
            return Err(Error::invalid("tdt_beta", "must be finite and > 0"));
        }
        if self.envelope_window < 3 || self.envelope_window % 2 == 0 {
            return Err(Error::invalid("envelope_window", "must be odd and >= 3"));
        }
        Ok(())
    }
}

/// Unit energy, or the zero vector if there is no energy left.
pub fn renormalize(x: Vec<f64>) -> Result<Vec<f64>> {
    match normalize(&x) {
        Ok(y) => Ok(y),
        Err(Error::CannotNormalize) => Ok(x),
        Err(e) => Err(e),
    }
}
