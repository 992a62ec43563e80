//! Chirp-sequence radar scene model and beat-signal synthesis.

mod beat;
mod dataset;
mod frame;
mod scene;

pub use beat::{beat_phase, clean_beat_signal, interference_beat, interference_support};
pub use dataset::{derive_seed, generate_dataset, DatasetSummary, FrameRecord, MAX_RESAMPLES};
pub use frame::{fit_to_length, normalize, synthesize_frame, BeatFrame};
pub use scene::{sample_scene, SceneBounds};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SPEED_OF_LIGHT};

/// The radar whose beat signal is being cleaned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VictimRadar {
    /// Start frequency of each chirp.
    pub carrier_frequency_hz: f64,
    pub sweep_bandwidth_hz: f64,
    pub chirp_duration_s: f64,
    pub num_chirps: usize,
    pub sample_rate_hz: f64,
    pub lpf_cutoff_hz: f64,
}

impl VictimRadar {
    /// Chirp slope in Hz/s.
    pub fn slope(&self) -> f64 {
        self.sweep_bandwidth_hz / self.chirp_duration_s
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    /// Number of ADC samples taken during one chirp, `round(T_chirp * f_s)`.
    pub fn samples_per_chirp(&self) -> usize {
        (self.chirp_duration_s * self.sample_rate_hz).round() as usize
    }

    /// Beat frequency produced by a static reflector at `range_m`.
    pub fn range_to_beat_frequency(&self, range_m: f64) -> f64 {
        2.0 * self.slope() * range_m / SPEED_OF_LIGHT
    }

    pub fn beat_frequency_to_range(&self, beat_hz: f64) -> f64 {
        beat_hz * SPEED_OF_LIGHT / (2.0 * self.slope())
    }

    /// Slow-time phase progression in cycles per chirp for radial velocity `v`.
    pub fn doppler_cycles_per_chirp(&self, velocity_mps: f64) -> f64 {
        2.0 * velocity_mps / SPEED_OF_LIGHT * self.carrier_frequency_hz * self.chirp_duration_s
    }

    pub fn velocity_from_doppler(&self, cycles_per_chirp: f64) -> f64 {
        cycles_per_chirp * SPEED_OF_LIGHT / (2.0 * self.carrier_frequency_hz * self.chirp_duration_s)
    }

    pub fn validate(&self) -> Result<()> {
        positive("carrier_frequency_hz", self.carrier_frequency_hz)?;
        positive("sweep_bandwidth_hz", self.sweep_bandwidth_hz)?;
        positive("chirp_duration_s", self.chirp_duration_s)?;
        positive("sample_rate_hz", self.sample_rate_hz)?;
        positive("lpf_cutoff_hz", self.lpf_cutoff_hz)?;
        if !self.slope().is_finite() {
            return Err(Error::invalid("slope", "chirp slope is not finite"));
        }
        if self.lpf_cutoff_hz > self.sample_rate_hz / 2.0 {
            return Err(Error::invalid(
                "lpf_cutoff_hz",
                format!(
                    "{} Hz exceeds Nyquist ({} Hz)",
                    self.lpf_cutoff_hz,
                    self.sample_rate_hz / 2.0
                ),
            ));
        }
        if self.num_chirps == 0 {
            return Err(Error::invalid("num_chirps", "must be at least 1"));
        }
        Ok(())
    }
}

/// A point reflector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub amplitude: f64,
}

impl Target {
    pub fn validate(&self) -> Result<()> {
        positive("range_m", self.range_m)?;
        positive("amplitude", self.amplitude)?;
        if !self.velocity_mps.is_finite() {
            return Err(Error::invalid("velocity_mps", "not finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveformKind {
    /// Repeated up-ramps, like the victim.
    #[serde(rename = "sawtooth-cs")]
    Sawtooth,
    /// Alternating up and down ramps of equal duration.
    #[serde(rename = "triangle-fmcw")]
    Triangle,
}

/// Another radar transmitting in the victim's band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interferer {
    pub carrier_frequency_hz: f64,
    pub sweep_bandwidth_hz: f64,
    /// Duration of one ramp (a triangle period is two ramps).
    pub chirp_duration_s: f64,
    pub waveform: WaveformKind,
    pub range_m: f64,
    pub amplitude: f64,
    pub start_offset_s: f64,
}

impl Interferer {
    pub fn slope(&self) -> f64 {
        self.sweep_bandwidth_hz / self.chirp_duration_s
    }

    pub fn period(&self) -> f64 {
        match self.waveform {
            WaveformKind::Sawtooth => self.chirp_duration_s,
            WaveformKind::Triangle => 2.0 * self.chirp_duration_s,
        }
    }

    /// Frequency of the interfering wave as it arrives at the victim at
    /// absolute time `t` (one-way propagation delay included).
    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        let local = t - self.start_offset_s - self.range_m / SPEED_OF_LIGHT;
        let ramp = self.chirp_duration_s;
        let u = local.rem_euclid(self.period());
        match self.waveform {
            WaveformKind::Sawtooth => self.carrier_frequency_hz + self.slope() * u,
            WaveformKind::Triangle if u < ramp => self.carrier_frequency_hz + self.slope() * u,
            WaveformKind::Triangle => {
                self.carrier_frequency_hz + self.sweep_bandwidth_hz - self.slope() * (u - ramp)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("interferer.carrier_frequency_hz", self.carrier_frequency_hz)?;
        positive("interferer.sweep_bandwidth_hz", self.sweep_bandwidth_hz)?;
        positive("interferer.chirp_duration_s", self.chirp_duration_s)?;
        positive("interferer.amplitude", self.amplitude)?;
        if !(self.range_m.is_finite() && self.range_m >= 0.0) {
            return Err(Error::invalid("interferer.range_m", "must be finite and >= 0"));
        }
        if !self.start_offset_s.is_finite() {
            return Err(Error::invalid("interferer.start_offset_s", "not finite"));
        }
        Ok(())
    }
}

/// One randomized scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarScene {
    pub victim: VictimRadar,
    pub targets: Vec<Target>,
    pub interferers: Vec<Interferer>,
    pub noise_std: f64,
    pub rng_seed: u64,
}

impl RadarScene {
    pub fn validate(&self) -> Result<()> {
        self.victim.validate()?;
        for t in &self.targets {
            t.validate()?;
        }
        for i in &self.interferers {
            i.validate()?;
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::invalid("noise_std", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn strongest_target_amplitude(&self) -> f64 {
        self.targets.iter().map(|t| t.amplitude).fold(0.0, f64::max)
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
