use ndarray::{Array2, Array3, Axis};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cell::CellParams;
use super::layer::{LayerParams, LayerTrace};
use crate::{Error, Result};

/// Identifies the cell equations and wiring. Checkpoints with another tag are
/// refused.
pub const ARCH_TAG: &str = "rimnet-bigru/v1;gates=z,r,n;reset=after-recurrent;residual=from-layer-2";

/// How the two directions of a layer are combined.
pub const MERGE_MODE: &str = "sum";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub hidden_size: usize,
    pub num_layers: usize,
    pub seq_len: usize,
    pub dropout_rate: f64,
}

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_size == 0 {
            return Err(Error::invalid("hidden_size", "must be at least 1"));
        }
        if self.num_layers == 0 {
            return Err(Error::invalid("num_layers", "must be at least 1"));
        }
        if self.seq_len == 0 {
            return Err(Error::invalid("seq_len", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::invalid("dropout_rate", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

pub enum Mode<'a> {
    Inference,
    /// Dropout active, masks drawn from the given generator.
    Train(&'a mut dyn RngCore),
}

/// Residual bidirectional GRU stack with average pooling over the hidden
/// dimension.
///
/// Layer 1 maps the scalar input to `H` features. Every later layer computes
/// `X^{l+1} = X^l + BiGRU(X^l)`. The output at step `i` is the mean of the
/// `H` features of `X^L` at step `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GruNetwork {
    pub arch: Architecture,
    pub layers: Vec<LayerParams>,
}

/// Parameter gradients, shaped like [`GruNetwork::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerParams>,
}

/// Activations kept by a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    layers: Vec<LayerTrace>,
    batch: usize,
}

impl ForwardTrace {
    pub fn layer(&self, l: usize) -> &LayerTrace {
        &self.layers[l]
    }
}

fn layer_tensors(layers: &[LayerParams]) -> Vec<&[f64]> {
    layers
        .iter()
        .flat_map(|l| l.forward.tensors().into_iter().chain(l.backward.tensors()))
        .collect()
}

fn layer_tensors_mut(layers: &mut [LayerParams]) -> Vec<&mut [f64]> {
    layers
        .iter_mut()
        .flat_map(|l| {
            let LayerParams { forward, backward, .. } = l;
            forward.tensors_mut().into_iter().chain(backward.tensors_mut())
        })
        .collect()
}

impl GruNetwork {
    /// Fresh network with weights uniform in `±1/√H` and zero biases.
    pub fn new(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = arch.hidden_size;
        let layers = (0..arch.num_layers)
            .map(|l| {
                let d = if l == 0 { 1 } else { h };
                let forward = CellParams::init(d, h, &mut rng);
                let backward = CellParams::init(d, h, &mut rng);
                LayerParams::new(forward, backward, l > 0)
            })
            .collect::<Result<_>>()?;
        Ok(Self { arch, layers })
    }

    /// Assemble from explicit layers, checking they agree with `arch`.
    pub fn from_layers(arch: Architecture, layers: Vec<LayerParams>) -> Result<Self> {
        arch.validate()?;
        if layers.len() != arch.num_layers {
            return Err(Error::shape(format!("{} layers", arch.num_layers), format!("{} layers", layers.len())));
        }
        for (l, layer) in layers.iter().enumerate() {
            let d = if l == 0 { 1 } else { arch.hidden_size };
            if layer.hidden() != arch.hidden_size || layer.input_dim() != d || layer.has_residual != (l > 0) {
                return Err(Error::shape(
                    format!("layer {l}: D={d}, H={}, residual={}", arch.hidden_size, l > 0),
                    format!(
                        "layer {l}: D={}, H={}, residual={}",
                        layer.input_dim(),
                        layer.hidden(),
                        layer.has_residual
                    ),
                ));
            }
        }
        Ok(Self { arch, layers })
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        layer_tensors(&self.layers)
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        layer_tensors_mut(&mut self.layers)
    }

    /// Tensor names in [`GruNetwork::tensors`] order.
    pub fn tensor_names(&self) -> Vec<String> {
        (0..self.layers.len())
            .flat_map(|l| {
                ["forward", "backward"]
                    .into_iter()
                    .flat_map(move |dir| ["w", "u", "b"].into_iter().map(move |t| format!("layers.{l}.{dir}.{t}")))
            })
            .collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            layers: self.layers.iter().map(LayerParams::zeros_like).collect(),
        }
    }

    fn pack(&self, frames: &[&[f64]]) -> Result<Array3<f64>> {
        let n = self.arch.seq_len;
        if frames.is_empty() {
            return Err(Error::invalid("frames", "empty batch"));
        }
        if let Some(bad) = frames.iter().find(|f| f.len() != n) {
            return Err(Error::shape(format!("{n} samples"), format!("{} samples", bad.len())));
        }
        Ok(Array3::from_shape_fn((n, frames.len(), 1), |(t, b, _)| frames[b][t]))
    }

    /// Network input to `X^L`, optionally keeping the trace.
    fn run(&self, x0: Array3<f64>, mut mode: Mode<'_>) -> Result<(Array3<f64>, Vec<LayerTrace>)> {
        let mut x = x0;
        let mut traces = Vec::new();
        for layer in &self.layers {
            let dropout = match &mut mode {
                Mode::Inference => None,
                Mode::Train(rng) => Some((self.arch.dropout_rate, &mut **rng as &mut dyn RngCore)),
            };
            let (y, trace) = layer.forward(&x, dropout)?;
            x = if layer.has_residual { x + y } else { y };
            traces.extend(trace);
        }
        Ok((x, traces))
    }

    /// Per-step average over the hidden dimension, `(N, B, H) -> (N, B)`.
    pub fn pool(x: &Array3<f64>) -> Array2<f64> {
        x.mean_axis(Axis(2)).expect("non-empty hidden dimension")
    }

    fn unpack(y: Array2<f64>) -> Vec<Vec<f64>> {
        y.columns().into_iter().map(|c| c.to_vec()).collect()
    }

    /// Inference on a batch of frames (dropout off).
    pub fn forward_batch(&self, frames: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let (x, _) = self.run(self.pack(frames)?, Mode::Inference)?;
        Ok(Self::unpack(Self::pool(&x)))
    }

    /// Inference on one frame.
    pub fn forward(&self, frame: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_batch(&[frame])?.remove(0))
    }

    /// Forward pass in the given mode; a trace is returned only in training mode.
    pub fn forward_mode(&self, frames: &[&[f64]], mode: Mode<'_>) -> Result<(Vec<Vec<f64>>, Option<ForwardTrace>)> {
        let training = matches!(mode, Mode::Train(_));
        let (x, layers) = self.run(self.pack(frames)?, mode)?;
        let trace = training.then_some(ForwardTrace {
            layers,
            batch: frames.len(),
        });
        Ok((Self::unpack(Self::pool(&x)), trace))
    }

    /// Training-mode forward pass.
    pub fn forward_train(&self, frames: &[&[f64]], rng: &mut dyn RngCore) -> Result<(Vec<Vec<f64>>, ForwardTrace)> {
        let (y, trace) = self.forward_mode(frames, Mode::Train(rng))?;
        Ok((y, trace.expect("training mode keeps a trace")))
    }

    /// Exact gradients of a scalar loss given `dL/dY` for every frame of
    /// the traced batch.
    pub fn backward(&self, trace: &ForwardTrace, d_output: &[Vec<f64>]) -> Result<Gradients> {
        let n = self.arch.seq_len;
        let h = self.arch.hidden_size;
        if d_output.len() != trace.batch || d_output.iter().any(|d| d.len() != n) {
            return Err(Error::shape(
                format!("{} gradients of length {n}", trace.batch),
                format!("{} gradients", d_output.len()),
            ));
        }
        let scale = 1.0 / h as f64;
        let mut dx = Array3::from_shape_fn((n, trace.batch, h), |(t, b, _)| d_output[b][t] * scale);
        let mut grads = self.zero_gradients();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let d_in = layer.backward(&trace.layers[l], &dx, &mut grads.layers[l]);
            dx = if layer.has_residual { dx + d_in } else { d_in };
        }
        Ok(grads)
    }
}

impl Gradients {
    pub fn tensors(&self) -> Vec<&[f64]> {
        layer_tensors(&self.layers)
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        layer_tensors_mut(&mut self.layers)
    }

    /// Add `other` into `self`.
    pub fn accumulate(&mut self, other: &Gradients) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (a, b) in dst.iter_mut().zip(src) {
                *a += b;
            }
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch(h: usize, l: usize, n: usize, p: f64) -> Architecture {
        Architecture {
            hidden_size: h,
            num_layers: l,
            seq_len: n,
            dropout_rate: p,
        }
    }

    fn frame(n: usize, phase: f64) -> Vec<f64> {
        (0..n).map(|i| (0.7 * i as f64 + phase).sin() * 0.3).collect()
    }

    #[test]
    fn wiring_follows_the_residual_rule() {
        let net = GruNetwork::new(arch(6, 3, 10, 0.0), 1).unwrap();
        assert_eq!(net.layers[0].input_dim(), 1);
        assert!(!net.layers[0].has_residual);
        assert!(net.layers[1..].iter().all(|l| l.has_residual && l.input_dim() == 6));
        assert_eq!(net.tensor_names().len(), net.tensors().len());
        assert_eq!(net.tensor_names()[0], "layers.0.forward.w");
    }

    #[test]
    fn rejects_wrong_length() {
        let net = GruNetwork::new(arch(4, 2, 10, 0.0), 1).unwrap();
        assert!(net.forward(&[0.0; 9]).is_err());
        assert!(net.forward_batch(&[]).is_err());
    }

    #[test]
    fn rejects_bad_architecture() {
        assert!(GruNetwork::new(arch(0, 2, 10, 0.0), 1).is_err());
        assert!(GruNetwork::new(arch(4, 0, 10, 0.0), 1).is_err());
        assert!(GruNetwork::new(arch(4, 2, 10, 1.0), 1).is_err());
    }

    #[test]
    fn zeroed_deep_layer_is_identity() {
        let mut net = GruNetwork::new(arch(5, 3, 12, 0.0), 3).unwrap();
        let x = frame(12, 0.2);
        // A layer whose candidate is tanh(0) = 0 with zero state emits 0 everywhere.
        let mut shallow = net.clone();
        shallow.layers.truncate(2);
        shallow.arch.num_layers = 2;
        net.layers[2].forward = CellParams::zeros(5, 5);
        net.layers[2].backward = CellParams::zeros(5, 5);
        assert_eq!(net.forward(&x).unwrap(), shallow.forward(&x).unwrap());
    }

    #[test]
    fn pooling_is_columnwise() {
        let x = Array3::from_shape_fn((3, 1, 4), |(t, _, j)| if t == 1 { 0.25 } else { j as f64 });
        let y = GruNetwork::pool(&x);
        assert_eq!(y[[1, 0]], 0.25);
        assert_eq!(y[[0, 0]], 1.5);
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_gradients() {
        let net = GruNetwork::new(arch(4, 2, 8, 0.3), 2).unwrap();
        let x = frame(8, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, trace) = net.forward_train(&[&x], &mut rng).unwrap();
        let g = net.backward(&trace, &[vec![0.0; 8]]).unwrap();
        assert_eq!(g.global_norm(), 0.0);
    }

    #[test]
    fn backward_checks_gradient_shape() {
        let net = GruNetwork::new(arch(4, 2, 8, 0.0), 2).unwrap();
        let x = frame(8, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, trace) = net.forward_train(&[&x], &mut rng).unwrap();
        assert!(net.backward(&trace, &[vec![0.0; 7]]).is_err());
        assert!(net.backward(&trace, &[]).is_err());
    }

    #[test]
    fn inference_is_batch_invariant() {
        let net = GruNetwork::new(arch(6, 2, 20, 0.3), 5).unwrap();
        let a = frame(20, 0.0);
        let b = frame(20, 1.0);
        let both = net.forward_batch(&[&a, &b]).unwrap();
        assert_eq!(both[0], net.forward(&a).unwrap());
        assert_eq!(both[1], net.forward(&b).unwrap());
    }
}
