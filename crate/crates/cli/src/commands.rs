use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rimnet::io::rimd::RimdWriter;
use rimnet::io::{csv, read_rimc, read_rimd, write_json, write_rimc, JsonLines, RimdHeader, ScenarioConfig};
use rimnet::mitigation::{MethodContext, MethodRegistry, Mitigator, Proposed};
use rimnet::nn::GruNetwork;
use rimnet::radar::{generate_dataset, normalize, BeatFrame, VictimRadar};
use rimnet::spectral::{evaluate_methods, method_spectra, range_fft, EvalOptions, WindowKind};
use rimnet::train::{self, split_indices, BatchRecord, EpochRecord, TrainObserver};
use rimnet::{Error, Result, FRAME_LEN};
use serde::Serialize;

use crate::{EvaluateArgs, GenerateArgs, MitigateArgs, TrainArgs};

fn load_config(path: Option<&Path>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::load(p),
        None => Ok(ScenarioConfig::default()),
    }
}

/// `dir/name.ckpt.rimc` + `suffix` -> `dir/name.ckpt<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let bounds = config.bounds();
    let started = Instant::now();
    let header = RimdHeader {
        count: args.count,
        frame_len: FRAME_LEN as u32,
        sample_rate_hz: bounds.sample_rate_hz,
        base_seed: args.seed,
    };
    let mut writer = RimdWriter::create(&args.out, header)?;
    let summary = generate_dataset(args.count as usize, args.seed, &bounds, |r| writer.push(&r))?;
    writer.finish()?;
    println!(
        "generated {} frames ({} resampled) in {:.2} s -> {}",
        summary.count,
        summary.resampled,
        started.elapsed().as_secs_f64(),
        args.out.display()
    );
    Ok(())
}

fn load_frames(path: &Path) -> Result<Vec<BeatFrame>> {
    let data = read_rimd(path)?;
    if data.header.frame_len as usize != FRAME_LEN {
        return Err(Error::shape(
            format!("{FRAME_LEN}-sample frames"),
            format!("{}-sample frames in {}", data.header.frame_len, path.display()),
        ));
    }
    Ok(data.frames())
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LogLine<'a> {
    Batch(&'a BatchRecord),
    Epoch(&'a EpochRecord),
}

struct CliObserver {
    log: JsonLines<BufWriter<File>>,
    checkpoint: PathBuf,
    quiet: bool,
}

impl TrainObserver for CliObserver {
    fn on_batch(&mut self, record: &BatchRecord) -> Result<()> {
        self.log.append(&LogLine::Batch(record))
    }

    fn on_epoch(&mut self, r: &EpochRecord) -> Result<()> {
        if !self.quiet {
            eprintln!(
                "epoch {:>3}  step {:>6}  train {:.6}  val {:.6}  {:.1} s",
                r.epoch, r.step, r.train_loss, r.val_loss, r.wall_time_s
            );
        }
        self.log.append(&LogLine::Epoch(r))
    }

    fn on_checkpoint(&mut self, _step: u64, net: &GruNetwork) -> Result<()> {
        write_rimc(&self.checkpoint, net)
    }
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let mut tc = config.train.clone();
    if let Some(e) = args.epochs {
        tc.epochs = e;
    }
    if let Some(h) = args.hidden {
        tc.hidden_size = h;
    }
    if let Some(l) = args.layers {
        tc.num_layers = l;
    }
    if let Some(s) = args.seed {
        tc.seed = s;
    }
    tc.validate()?;

    let frames = load_frames(&args.data)?;
    let (train_set, val_set) = match &args.val {
        Some(p) => (frames, load_frames(p)?),
        None => {
            let (ti, vi) = split_indices(frames.len(), tc.val_fraction, tc.seed);
            if ti.is_empty() || vi.is_empty() {
                return Err(Error::InvalidParameter {
                    name: "data",
                    reason: format!("{} frames are too few to hold out a validation share", frames.len()),
                });
            }
            let pick = |idx: &[usize]| idx.iter().map(|&i| frames[i].clone()).collect::<Vec<_>>();
            (pick(&ti), pick(&vi))
        }
    };

    let log_path = args.log.clone().unwrap_or_else(|| sibling(&args.ckpt_out, ".log.jsonl"));
    let log_file = File::create(&log_path).map_err(|e| Error::io(format!("creating {}", log_path.display()), e))?;
    let mut observer = CliObserver {
        log: JsonLines::new(BufWriter::new(log_file)),
        checkpoint: sibling(&args.ckpt_out, ".latest.rimc"),
        quiet: args.quiet,
    };
    let outcome = train::train(&tc, &train_set, &val_set, &mut observer)?;
    write_rimc(&args.ckpt_out, &outcome.best)?;
    write_rimc(&sibling(&args.ckpt_out, ".final.rimc"), &outcome.last)?;
    if let Some(best) = outcome.log.best_epoch() {
        println!(
            "best epoch {} (val loss {:.6}) -> {}",
            best.epoch,
            best.val_loss,
            args.ckpt_out.display()
        );
    } else {
        println!("no epochs run; wrote the initial network to {}", args.ckpt_out.display());
    }
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let registry = MethodRegistry::builtin();
    if let Some(bad) = args.methods.iter().find(|m| !registry.contains(m)) {
        return Err(Error::UnknownMethod(bad.clone()));
    }
    let model = match &args.model {
        Some(p) => Some(Arc::new(read_rimc(p)?)),
        None => None,
    };
    let ctx = MethodContext {
        config: config.mitigation(),
        model,
    };
    let methods = registry.build_all(&args.methods, &ctx)?;

    let mut records = read_rimd(&args.data)?.records;
    if let Some(n) = args.limit {
        records.truncate(n);
    }
    let options = EvalOptions::default();
    let report = evaluate_methods(&records, &methods, &options)?;
    write_json(&args.report, &report)?;

    if let Some(dir) = &args.spectra_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        for (i, record) in records.iter().enumerate() {
            let spectra = method_spectra(record, &methods, options.window)?;
            let input = range_fft(&record.frame.input, options.window, &record.scene.victim)?;
            let label = range_fft(&record.frame.label, options.window, &record.scene.victim)?;
            let mut columns: Vec<(&str, &_)> = vec![("input", &input), ("label", &label)];
            columns.extend(spectra.iter().map(|(n, s)| (n.as_str(), s)));
            csv::write_spectra(&dir.join(format!("frame_{i:05}.csv")), &columns)?;
        }
    }
    for (name, mean) in &report.aggregate {
        println!("{name:<10} {mean:>8.3} dB");
    }
    Ok(())
}

pub fn mitigate(args: &MitigateArgs) -> Result<()> {
    if !(args.sample_rate > 0.0 && args.slope > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sample_rate/slope",
            reason: "must be positive".into(),
        });
    }
    let raw = csv::read_frame(&args.input, FRAME_LEN)?;
    let model = Arc::new(read_rimc(&args.model)?);
    let input = normalize(&raw)?;
    let output = Proposed::new(model).mitigate(&input)?;
    csv::write_frame(&args.out, &output)?;

    // Only the sampling rate and slope matter for the spectrum axes.
    let chirp = FRAME_LEN as f64 / args.sample_rate;
    let victim = VictimRadar {
        carrier_frequency_hz: 77e9,
        sweep_bandwidth_hz: args.slope * chirp,
        chirp_duration_s: chirp,
        num_chirps: 1,
        sample_rate_hz: args.sample_rate,
        lpf_cutoff_hz: args.sample_rate / 2.0,
    };
    let before = range_fft(&input, WindowKind::Hann, &victim)?;
    let after = range_fft(&output, WindowKind::Hann, &victim)?;
    let path = args.spectra.clone().unwrap_or_else(|| sibling(&args.out, ".spectra.csv"));
    csv::write_spectra(&path, &[("input", &before), ("output", &after)])?;
    println!("wrote {} and {}", args.out.display(), path.display());
    Ok(())
}
