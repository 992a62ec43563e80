use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Interferer, RadarScene, Target, VictimRadar, WaveformKind};
use crate::{Error, Result, NUM_CHIRPS};

/// Ranges the scene sampler draws from. Defaults follow the randomized
/// simulator parameters (carrier 76–78 GHz, 1–130 m, 0–50 km/h,
/// 100–200 MHz sweeps, 20–40 µs chirps, 1–2 targets, 1–4 interferers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneBounds {
    pub carrier_hz: (f64, f64),
    pub bandwidth_hz: (f64, f64),
    pub chirp_duration_s: (f64, f64),
    pub sample_rate_hz: f64,
    /// `None` means half the sample rate.
    pub lpf_cutoff_hz: Option<f64>,
    pub num_chirps: usize,
    pub range_m: (f64, f64),
    pub velocity_kmh: (f64, f64),
    pub targets: (usize, usize),
    pub interferers: (usize, usize),
    /// Strongest-target sinusoid power over noise variance.
    pub snr_db: (f64, f64),
    /// Interferer amplitude relative to the strongest target, drawn log-uniform.
    pub interferer_amplitude_ratio: (f64, f64),
}

impl Default for SceneBounds {
    fn default() -> Self {
        Self {
            carrier_hz: (76e9, 78e9),
            bandwidth_hz: (100e6, 200e6),
            chirp_duration_s: (20e-6, 40e-6),
            sample_rate_hz: 20e6,
            lpf_cutoff_hz: None,
            num_chirps: NUM_CHIRPS,
            range_m: (1.0, 130.0),
            velocity_kmh: (0.0, 50.0),
            targets: (1, 2),
            interferers: (1, 4),
            snr_db: (10.0, 30.0),
            interferer_amplitude_ratio: (0.5, 5.0),
        }
    }
}

/// Minimum relative slope difference between a sawtooth interferer and the
/// victim.
const MIN_SLOPE_GAP: f64 = 0.02;

impl SceneBounds {
    pub fn lpf_cutoff(&self) -> f64 {
        self.lpf_cutoff_hz.unwrap_or(self.sample_rate_hz / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        fn span(name: &'static str, (lo, hi): (f64, f64), min: f64) -> Result<()> {
            if !(lo.is_finite() && hi.is_finite() && lo >= min && lo <= hi) {
                return Err(Error::invalid(name, format!("bad bounds [{lo}, {hi}]")));
            }
            Ok(())
        }
        span("carrier_hz", self.carrier_hz, f64::MIN_POSITIVE)?;
        span("bandwidth_hz", self.bandwidth_hz, f64::MIN_POSITIVE)?;
        span("chirp_duration_s", self.chirp_duration_s, f64::MIN_POSITIVE)?;
        span("range_m", self.range_m, f64::MIN_POSITIVE)?;
        span("velocity_kmh", self.velocity_kmh, f64::NEG_INFINITY)?;
        span("snr_db", self.snr_db, f64::NEG_INFINITY)?;
        span("interferer_amplitude_ratio", self.interferer_amplitude_ratio, f64::MIN_POSITIVE)?;
        if self.targets.0 > self.targets.1 {
            return Err(Error::invalid("targets", "min > max"));
        }
        if self.interferers.0 > self.interferers.1 {
            return Err(Error::invalid("interferers", "min > max"));
        }
        let probe = VictimRadar {
            carrier_frequency_hz: self.carrier_hz.0,
            sweep_bandwidth_hz: self.bandwidth_hz.0,
            chirp_duration_s: self.chirp_duration_s.0,
            num_chirps: self.num_chirps,
            sample_rate_hz: self.sample_rate_hz,
            lpf_cutoff_hz: self.lpf_cutoff(),
        };
        probe.validate()
    }

    /// Draw one scene. Deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> RadarScene {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let victim = VictimRadar {
            carrier_frequency_hz: uniform(&mut rng, self.carrier_hz),
            sweep_bandwidth_hz: uniform(&mut rng, self.bandwidth_hz),
            chirp_duration_s: uniform(&mut rng, self.chirp_duration_s),
            num_chirps: self.num_chirps,
            sample_rate_hz: self.sample_rate_hz,
            lpf_cutoff_hz: self.lpf_cutoff(),
        };

        let n_targets = rng.gen_range(self.targets.0..=self.targets.1);
        let targets: Vec<Target> = (0..n_targets)
            .map(|_| {
                let range_m = uniform(&mut rng, self.range_m);
                Target {
                    range_m,
                    velocity_mps: uniform(&mut rng, self.velocity_kmh) / 3.6,
                    // Amplitude falls with the square of range.
                    amplitude: range_m.powi(-2),
                }
            })
            .collect();
        let strongest = targets.iter().map(|t| t.amplitude).fold(0.0, f64::max);
        // Reference amplitude when the scene has no targets at all.
        let reference = if strongest > 0.0 { strongest } else { 1.0 };

        let n_interferers = rng.gen_range(self.interferers.0..=self.interferers.1);
        let interferers = (0..n_interferers)
            .map(|_| self.sample_interferer(&mut rng, &victim, reference))
            .collect();

        let snr_db = uniform(&mut rng, self.snr_db);
        let noise_std = reference / std::f64::consts::SQRT_2 / 10f64.powf(snr_db / 20.0);

        RadarScene {
            victim,
            targets,
            interferers,
            noise_std,
            rng_seed: seed,
        }
    }

    fn sample_interferer(
        &self,
        rng: &mut ChaCha8Rng,
        victim: &VictimRadar,
        reference: f64,
    ) -> Interferer {
        let waveform = if rng.gen_bool(0.5) {
            WaveformKind::Sawtooth
        } else {
            WaveformKind::Triangle
        };
        let sweep_bandwidth_hz = uniform(rng, self.bandwidth_hz);
        let mut chirp_duration_s = uniform(rng, self.chirp_duration_s);
        if waveform == WaveformKind::Sawtooth {
            for _ in 0..64 {
                let gap = (sweep_bandwidth_hz / chirp_duration_s - victim.slope()).abs();
                if gap > MIN_SLOPE_GAP * victim.slope() {
                    break;
                }
                chirp_duration_s = uniform(rng, self.chirp_duration_s);
            }
        }
        // Place the interfering sweep so that it overlaps the victim band.
        let carrier_frequency_hz = uniform(
            rng,
            (
                victim.carrier_frequency_hz - sweep_bandwidth_hz,
                victim.carrier_frequency_hz + victim.sweep_bandwidth_hz,
            ),
        );
        let (lo, hi) = self.interferer_amplitude_ratio;
        let ratio = (uniform(rng, (lo.ln(), hi.ln()))).exp();
        let range_m = uniform(rng, self.range_m);
        let period = match waveform {
            WaveformKind::Sawtooth => chirp_duration_s,
            WaveformKind::Triangle => 2.0 * chirp_duration_s,
        };
        Interferer {
            carrier_frequency_hz,
            sweep_bandwidth_hz,
            chirp_duration_s,
            waveform,
            range_m,
            amplitude: reference * ratio,
            start_offset_s: uniform(rng, (0.0, period)),
        }
    }
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Draw a scene from the default bounds.
pub fn sample_scene(seed: u64) -> RadarScene {
    SceneBounds::default().sample(seed)
}
