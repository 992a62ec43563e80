use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rimnet::io::{decode_rimc, encode_rimc};
use rimnet::nn::{mse_loss, Architecture, GruNetwork};
use rimnet::radar::{generate_dataset, BeatFrame, SceneBounds};
use rimnet::train::{train, validate, EpochRecord, Silent, TrainConfig, TrainObserver};
use rimnet::{Error, Result};

fn frames(count: usize, seed: u64) -> Vec<BeatFrame> {
    let mut out = Vec::new();
    generate_dataset(count, seed, &SceneBounds::default(), |r| {
        out.push(r.frame);
        Ok(())
    })
    .unwrap();
    out
}

fn small_config() -> TrainConfig {
    TrainConfig {
        hidden_size: 8,
        num_layers: 2,
        batch_size: 16,
        epochs: 2,
        seed: 3,
        ..TrainConfig::default()
    }
}

#[test]
fn toy_set_halves_the_training_loss() {
    let data = frames(200, 1);
    let val = frames(40, 2);
    let config = TrainConfig {
        hidden_size: 16,
        num_layers: 2,
        batch_size: 16,
        epochs: 20,
        seed: 5,
        ..TrainConfig::default()
    };
    let out = train(&config, &data, &val, &mut Silent).unwrap();
    let initial = out.log.batches[0].loss;
    let last = out.log.epochs.last().unwrap().train_loss;
    assert!(last < 0.5 * initial, "initial {initial:.4}, final {last:.4}");
    assert!(out.log.batches.iter().all(|b| b.loss.is_finite()));
    let steps: Vec<u64> = out.log.batches.iter().map(|b| b.step).collect();
    assert!(steps.windows(2).all(|w| w[1] == w[0] + 1));
}

#[test]
fn zero_epochs_returns_the_initial_network() {
    let data = frames(20, 3);
    let config = TrainConfig {
        epochs: 0,
        ..small_config()
    };
    let a = train(&config, &data, &data, &mut Silent).unwrap();
    let b = train(&config, &data, &data, &mut Silent).unwrap();
    assert!(a.log.batches.is_empty() && a.log.epochs.is_empty());
    assert_eq!(a.best, a.last);
    assert_eq!(a.best, b.best);
}

#[test]
fn runs_are_bit_identical() {
    let data = frames(40, 4);
    let val = frames(10, 5);
    let a = train(&small_config(), &data, &val, &mut Silent).unwrap();
    let b = train(&small_config(), &data, &val, &mut Silent).unwrap();
    assert_eq!(encode_rimc(&a.best), encode_rimc(&b.best));
    assert_eq!(encode_rimc(&a.last), encode_rimc(&b.last));
    let other = TrainConfig {
        seed: 4,
        ..small_config()
    };
    let c = train(&other, &data, &val, &mut Silent).unwrap();
    assert_ne!(encode_rimc(&a.last), encode_rimc(&c.last));
}

#[test]
fn best_checkpoint_reproduces_its_validation_loss() {
    let data = frames(48, 6);
    let val = frames(12, 7);
    let config = TrainConfig {
        epochs: 4,
        ..small_config()
    };
    let out = train(&config, &data, &val, &mut Silent).unwrap();
    let best = out.log.best_epoch().unwrap();
    let min = out.log.epochs.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min);
    assert_eq!(best.val_loss, min);
    let reloaded = decode_rimc(&encode_rimc(&out.best)).unwrap();
    assert_eq!(validate(&reloaded, &val, config.micro_batch).unwrap(), best.val_loss);
    let last = out.log.epochs.last().unwrap();
    assert_eq!(validate(&out.last, &val, 5).unwrap(), last.val_loss);
}

#[test]
fn micro_batching_only_regroups_the_work() {
    let data = frames(24, 8);
    let val = frames(6, 9);
    let whole = TrainConfig {
        micro_batch: 16,
        ..small_config()
    };
    let split = TrainConfig {
        micro_batch: 5,
        dropout_rate: 0.0,
        ..small_config()
    };
    let whole = TrainConfig {
        dropout_rate: 0.0,
        ..whole
    };
    let a = train(&whole, &data, &val, &mut Silent).unwrap();
    let b = train(&split, &data, &val, &mut Silent).unwrap();
    for (x, y) in a.last.tensors().iter().zip(b.last.tensors()) {
        for (p, q) in x.iter().zip(y) {
            assert!((p - q).abs() < 1e-9);
        }
    }
}

#[test]
fn validate_is_the_mean_frame_loss() {
    let val = frames(9, 10);
    let net = GruNetwork::new(
        Architecture {
            hidden_size: 5,
            num_layers: 2,
            seq_len: rimnet::FRAME_LEN,
            dropout_rate: 0.3,
        },
        1,
    )
    .unwrap();
    let direct: f64 = val
        .iter()
        .map(|f| mse_loss(&net.forward(&f.input).unwrap(), &f.label).unwrap())
        .sum::<f64>()
        / 9.0;
    let got = validate(&net, &val, 4).unwrap();
    assert!((got - direct).abs() < 1e-12);
    let doubled: Vec<BeatFrame> = val.iter().chain(&val).cloned().collect();
    assert!((validate(&net, &doubled, 4).unwrap() - got).abs() < 1e-12);

    // A perfect predictor scores zero.
    assert_eq!(mse_loss(&val[0].label, &val[0].label).unwrap(), 0.0);
}

#[test]
fn dropout_only_in_training_mode() {
    let net = GruNetwork::new(
        Architecture {
            hidden_size: 8,
            num_layers: 2,
            seq_len: rimnet::FRAME_LEN,
            dropout_rate: 0.3,
        },
        2,
    )
    .unwrap();
    let x = frames(1, 11).remove(0).input;
    let inference: Vec<Vec<f64>> = (0..5).map(|_| net.forward(&x).unwrap()).collect();
    assert!(inference.windows(2).all(|w| w[0] == w[1]));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let train_mode: Vec<Vec<f64>> = (0..5)
        .map(|_| net.forward_train(&[&x], &mut rng).unwrap().0.remove(0))
        .collect();
    let variance: f64 = (0..x.len())
        .map(|t| {
            let m = train_mode.iter().map(|y| y[t]).sum::<f64>() / 5.0;
            train_mode.iter().map(|y| (y[t] - m).powi(2)).sum::<f64>() / 5.0
        })
        .sum();
    assert!(variance > 0.0);
}

#[test]
fn non_finite_data_aborts_with_a_diagnostic() {
    let mut data = frames(20, 12);
    data[7].input[100] = f64::NAN;
    let err = train(&small_config(), &data, &data[..5], &mut Silent).unwrap_err();
    match err {
        Error::NonFiniteLoss { step, .. } => assert!(step >= 1),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn wrong_frame_length_is_rejected_before_training() {
    let mut data = frames(4, 13);
    data[2].input.pop();
    data[2].label.pop();
    let err = train(&small_config(), &data, &data, &mut Silent).unwrap_err();
    assert!(matches!(err, Error::ShapeMismatch { .. }));
}

#[derive(Default)]
struct Recorder {
    epochs: Vec<EpochRecord>,
    checkpoints: Vec<u64>,
}

impl TrainObserver for Recorder {
    fn on_epoch(&mut self, record: &EpochRecord) -> Result<()> {
        self.epochs.push(*record);
        Ok(())
    }

    fn on_checkpoint(&mut self, step: u64, _net: &GruNetwork) -> Result<()> {
        self.checkpoints.push(step);
        Ok(())
    }
}

#[test]
fn observer_sees_epochs_and_periodic_checkpoints() {
    let data = frames(40, 14);
    let config = TrainConfig {
        checkpoint_every: 2,
        epochs: 2,
        ..small_config()
    };
    let mut rec = Recorder::default();
    let out = train(&config, &data, &data[..8], &mut rec).unwrap();
    assert_eq!(rec.epochs, out.log.epochs);
    // 40 frames in batches of 16 is 3 steps per epoch.
    assert_eq!(rec.checkpoints, [2, 4, 6]);
}
