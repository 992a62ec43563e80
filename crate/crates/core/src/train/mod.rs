//! Epoch loop, batching, validation and best-checkpoint selection.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{mse_loss, mse_loss_grad, AdamConfig, Architecture, GruNetwork, TrainState};
use crate::radar::{derive_seed, BeatFrame};
use crate::{Error, Result, FRAME_LEN};

const SHUFFLE_STREAM: u64 = 0x7368_7566_0000_0000;
const SPLIT_STREAM: u64 = 0x7370_6c69_7400_0000;
const DROPOUT_STREAM: u64 = 0x6472_6f70_0000_0000;
const INIT_STREAM: u64 = 0x696e_6974_0000_0000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden_size: usize,
    pub num_layers: usize,
    pub dropout_rate: f64,
    pub epochs: usize,
    pub clip_norm: f64,
    pub seed: u64,
    /// Hand the current network to the observer every this many batches.
    pub checkpoint_every: usize,
    pub val_fraction: f64,
    /// Frames per forward/backward pass inside a batch. Only bounds memory;
    /// the update still uses the whole batch.
    pub micro_batch: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 128,
            learning_rate: 1e-3,
            hidden_size: 100,
            num_layers: 3,
            dropout_rate: 0.3,
            epochs: 30,
            clip_norm: 1.0,
            seed: 0,
            checkpoint_every: 100,
            val_fraction: 0.1,
            micro_batch: 32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("batch_size", self.batch_size),
            ("hidden_size", self.hidden_size),
            ("num_layers", self.num_layers),
            ("checkpoint_every", self.checkpoint_every),
            ("micro_batch", self.micro_batch),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate", "must be positive"));
        }
        if !(self.clip_norm > 0.0 && self.clip_norm.is_finite()) {
            return Err(Error::invalid("clip_norm", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::invalid("dropout_rate", "must lie in [0, 1)"));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::invalid("val_fraction", "must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            hidden_size: self.hidden_size,
            num_layers: self.num_layers,
            seq_len: FRAME_LEN,
            dropout_rate: self.dropout_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub epoch: usize,
    pub batch: usize,
    pub step: u64,
    pub loss: f64,
    /// Gradient norm before clipping.
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub step: u64,
    pub train_loss: f64,
    pub val_loss: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub batches: Vec<BatchRecord>,
    pub epochs: Vec<EpochRecord>,
}

impl TrainLog {
    pub fn step_count(&self) -> u64 {
        self.batches.last().map_or(0, |b| b.step)
    }

    /// Epoch with the lowest validation loss; the first one wins ties.
    pub fn best_epoch(&self) -> Option<&EpochRecord> {
        self.epochs
            .iter()
            .fold(None, |best: Option<&EpochRecord>, e| match best {
                Some(b) if b.val_loss <= e.val_loss => Some(b),
                _ => Some(e),
            })
    }
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Network after the epoch with the lowest validation loss (the initial
    /// network when no epoch ran).
    pub best: GruNetwork,
    /// Network after the last epoch.
    pub last: GruNetwork,
    pub log: TrainLog,
}

/// Hooks for streaming logs and intermediate checkpoints.
pub trait TrainObserver {
    fn on_batch(&mut self, _record: &BatchRecord) -> Result<()> {
        Ok(())
    }
    fn on_epoch(&mut self, _record: &EpochRecord) -> Result<()> {
        Ok(())
    }
    fn on_checkpoint(&mut self, _step: u64, _net: &GruNetwork) -> Result<()> {
        Ok(())
    }
}

/// Observer that ignores everything.
pub struct Silent;

impl TrainObserver for Silent {}

/// Frame indices of one epoch, shuffled by `(seed, epoch)` and cut into
/// batches. The last batch may be short.
pub fn make_batches(len: usize, batch_size: usize, seed: u64, epoch: usize) -> Result<Vec<Vec<usize>>> {
    if len == 0 {
        return Err(Error::invalid("dataset", "must not be empty"));
    }
    if batch_size == 0 {
        return Err(Error::invalid("batch_size", "must be positive"));
    }
    let mut order: Vec<usize> = (0..len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed ^ SHUFFLE_STREAM, epoch as u64));
    order.shuffle(&mut rng);
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}

/// Deterministic train/validation split: frame `i` goes to validation when a
/// hash of `(seed, i)` falls below `val_fraction`.
pub fn split_indices(len: usize, val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let threshold = (val_fraction * u64::MAX as f64) as u64;
    (0..len).partition(|&i| derive_seed(seed ^ SPLIT_STREAM, i as u64) >= threshold)
}

fn check_frames(frames: &[BeatFrame], seq_len: usize) -> Result<()> {
    if frames.is_empty() {
        return Err(Error::invalid("dataset", "must not be empty"));
    }
    for f in frames {
        if f.input.len() != seq_len || f.label.len() != seq_len {
            return Err(Error::shape(
                format!("frames of {seq_len} samples"),
                format!("frame of {} samples", f.input.len()),
            ));
        }
    }
    Ok(())
}

/// Mean per-frame loss in inference mode.
pub fn validate(net: &GruNetwork, frames: &[BeatFrame], micro_batch: usize) -> Result<f64> {
    check_frames(frames, net.arch.seq_len)?;
    let mut total = 0.0;
    for chunk in frames.chunks(micro_batch.max(1)) {
        let inputs: Vec<&[f64]> = chunk.iter().map(|f| f.input.as_slice()).collect();
        let outputs = net.forward_batch(&inputs)?;
        for (y, f) in outputs.iter().zip(chunk) {
            total += mse_loss(y, &f.label)?;
        }
    }
    Ok(total / frames.len() as f64)
}

/// Train a fresh network from `config`.
pub fn train(
    config: &TrainConfig,
    train_data: &[BeatFrame],
    val_data: &[BeatFrame],
    observer: &mut dyn TrainObserver,
) -> Result<TrainOutcome> {
    config.validate()?;
    let net = GruNetwork::new(config.architecture(), derive_seed(config.seed, INIT_STREAM))?;
    train_from(net, config, train_data, val_data, observer)
}

/// Train starting from an existing network. Architecture fields of `config`
/// other than the dropout rate are ignored in favour of `net.arch`.
pub fn train_from(
    mut net: GruNetwork,
    config: &TrainConfig,
    train_data: &[BeatFrame],
    val_data: &[BeatFrame],
    observer: &mut dyn TrainObserver,
) -> Result<TrainOutcome> {
    config.validate()?;
    check_frames(train_data, net.arch.seq_len)?;
    check_frames(val_data, net.arch.seq_len)?;
    net.arch.dropout_rate = config.dropout_rate;

    let shapes: Vec<usize> = net.tensors().iter().map(|t| t.len()).collect();
    let adam = AdamConfig {
        learning_rate: config.learning_rate,
        ..AdamConfig::default()
    };
    let mut state = TrainState::new(adam, &shapes, config.clip_norm, derive_seed(config.seed, DROPOUT_STREAM));
    let mut log = TrainLog::default();
    let mut best = net.clone();
    let mut best_val = f64::INFINITY;
    let started = Instant::now();

    for epoch in 0..config.epochs {
        let batches = make_batches(train_data.len(), config.batch_size, config.seed, epoch)?;
        let mut epoch_loss = 0.0;
        for (b, batch) in batches.iter().enumerate() {
            let record = train_batch(&mut net, &mut state, train_data, batch, config.micro_batch, epoch, b)?;
            epoch_loss += record.loss * batch.len() as f64;
            log.batches.push(record);
            observer.on_batch(&record)?;
            if record.step % config.checkpoint_every as u64 == 0 {
                observer.on_checkpoint(record.step, &net)?;
            }
        }
        let val_loss = validate(&net, val_data, config.micro_batch)?;
        let step = state.adam.step_count();
        if !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                batch: batches.len().saturating_sub(1),
                step,
            });
        }
        let record = EpochRecord {
            epoch,
            step,
            train_loss: epoch_loss / train_data.len() as f64,
            val_loss,
            wall_time_s: started.elapsed().as_secs_f64(),
        };
        if val_loss < best_val {
            best_val = val_loss;
            best = net.clone();
        }
        log.epochs.push(record);
        observer.on_epoch(&record)?;
    }
    Ok(TrainOutcome { best, last: net, log })
}

/// One optimizer step on `batch`. The loss is the mean over frames of the
/// per-frame squared-error sum.
fn train_batch(
    net: &mut GruNetwork,
    state: &mut TrainState,
    data: &[BeatFrame],
    batch: &[usize],
    micro_batch: usize,
    epoch: usize,
    batch_id: usize,
) -> Result<BatchRecord> {
    let scale = 1.0 / batch.len() as f64;
    let mut grads = net.zero_gradients();
    let mut loss = 0.0;
    for chunk in batch.chunks(micro_batch) {
        let inputs: Vec<&[f64]> = chunk.iter().map(|&i| data[i].input.as_slice()).collect();
        let (outputs, trace) = net.forward_train(&inputs, &mut state.rng)?;
        let mut d_out = Vec::with_capacity(chunk.len());
        for (y, &i) in outputs.iter().zip(chunk) {
            loss += mse_loss(y, &data[i].label)? * scale;
            d_out.push(mse_loss_grad(y, &data[i].label, scale)?);
        }
        grads.accumulate(&net.backward(&trace, &d_out)?);
    }
    let step = state.adam.step_count() + 1;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss { batch: batch_id, step });
    }
    let grad_norm = crate::nn::clip_global_norm(&mut grads.tensors_mut(), state.clip_norm)?;
    if !grad_norm.is_finite() {
        return Err(Error::NonFiniteLoss { batch: batch_id, step });
    }
    let g = grads.tensors();
    state.adam.step(&mut net.tensors_mut(), &g)?;
    Ok(BatchRecord {
        epoch,
        batch: batch_id,
        step,
        loss,
        grad_norm,
    })
}
