use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::radar::VictimRadar;
use crate::{Error, Result, FRAME_LEN};

/// Lowest reported power, used in place of `log10(0)`.
pub const DB_FLOOR: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Rectangular,
    #[default]
    Hann,
}

impl WindowKind {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::Rectangular => vec![1.0; len],
            WindowKind::Hann => (0..len)
                .map(|n| 0.5 - 0.5 * (TAU * n as f64 / len as f64).cos())
                .collect(),
        }
    }
}

/// One-sided power spectrum of a single chirp.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSpectrum {
    /// `|X_k|²` in dB for `k < N/2`.
    pub bins: Vec<f64>,
    pub bin_width_hz: f64,
    pub range_per_bin_m: f64,
}

impl RangeSpectrum {
    pub fn bin_frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_width_hz
    }

    pub fn bin_range(&self, bin: usize) -> f64 {
        bin as f64 * self.range_per_bin_m
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.bins)
    }

    pub fn linear_power(&self) -> Vec<f64> {
        self.bins.iter().map(|db| 10f64.powf(db / 10.0)).collect()
    }
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

fn to_db(power: f64) -> f64 {
    if power > 0.0 {
        (10.0 * power.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

fn windowed_spectrum(frame: &[f64], window: WindowKind, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let w = window.coefficients(frame.len());
    let mut buf: Vec<Complex64> = frame
        .iter()
        .zip(&w)
        .map(|(x, w)| Complex64::new(x * w, 0.0))
        .collect();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

fn check_frame(frame: &[f64]) -> Result<()> {
    if frame.len() != FRAME_LEN {
        return Err(Error::shape(format!("{FRAME_LEN} samples"), format!("{} samples", frame.len())));
    }
    if frame.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("frame", "non-finite sample"));
    }
    Ok(())
}

/// Windowed range FFT of one frame.
pub fn range_fft(frame: &[f64], window: WindowKind, victim: &VictimRadar) -> Result<RangeSpectrum> {
    check_frame(frame)?;
    let mut planner = FftPlanner::new();
    let spectrum = windowed_spectrum(frame, window, &mut planner);
    let bin_width_hz = victim.sample_rate_hz / FRAME_LEN as f64;
    Ok(RangeSpectrum {
        bins: spectrum[..FRAME_LEN / 2].iter().map(|c| to_db(c.norm_sqr())).collect(),
        bin_width_hz,
        range_per_bin_m: victim.beat_frequency_to_range(bin_width_hz),
    })
}

/// Range-Doppler power map of a full chirp sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    /// Row-major `[doppler][range]`, dB.
    pub power_db: Vec<f64>,
    pub num_doppler: usize,
    pub num_range: usize,
    pub range_per_bin_m: f64,
}

impl RangeDopplerMap {
    pub fn at(&self, doppler: usize, range: usize) -> f64 {
        self.power_db[doppler * self.num_range + range]
    }

    /// Doppler bin to cycles per chirp, wrapped to `[-0.5, 0.5)`.
    pub fn doppler_cycles(&self, bin: usize) -> f64 {
        let f = bin as f64 / self.num_doppler as f64;
        if f >= 0.5 {
            f - 1.0
        } else {
            f
        }
    }

    /// `(doppler bin, range bin)` of the strongest cell.
    pub fn peak(&self) -> (usize, usize) {
        let i = argmax(&self.power_db);
        (i / self.num_range, i % self.num_range)
    }
}

/// Range FFT on every chirp followed by a slow-time FFT per range bin.
pub fn doppler_fft(frames: &[Vec<f64>], window: WindowKind, victim: &VictimRadar) -> Result<RangeDopplerMap> {
    if frames.len() != victim.num_chirps {
        return Err(Error::shape(
            format!("{} chirps", victim.num_chirps),
            format!("{} chirps", frames.len()),
        ));
    }
    let mut planner = FftPlanner::new();
    let num_range = FRAME_LEN / 2;
    let mut columns = vec![vec![Complex64::new(0.0, 0.0); frames.len()]; num_range];
    for (k, frame) in frames.iter().enumerate() {
        check_frame(frame)?;
        let spectrum = windowed_spectrum(frame, window, &mut planner);
        for (col, value) in columns.iter_mut().zip(&spectrum[..num_range]) {
            col[k] = *value;
        }
    }
    let slow = planner.plan_fft_forward(frames.len());
    let num_doppler = frames.len();
    let mut power_db = vec![0.0; num_doppler * num_range];
    for (r, col) in columns.iter_mut().enumerate() {
        slow.process(col);
        for (d, c) in col.iter().enumerate() {
            power_db[d * num_range + r] = to_db(c.norm_sqr());
        }
    }
    Ok(RangeDopplerMap {
        power_db,
        num_doppler,
        num_range,
        range_per_bin_m: victim.beat_frequency_to_range(victim.sample_rate_hz / FRAME_LEN as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar::{clean_beat_signal, fit_to_length, RadarScene, Target};

    fn radar() -> VictimRadar {
        VictimRadar {
            carrier_frequency_hz: 77e9,
            sweep_bandwidth_hz: 150e6,
            chirp_duration_s: 30e-6,
            num_chirps: 75,
            sample_rate_hz: 20e6,
            lpf_cutoff_hz: 10e6,
        }
    }

    fn tone(bin: f64) -> Vec<f64> {
        (0..FRAME_LEN)
            .map(|n| (TAU * bin * n as f64 / FRAME_LEN as f64).cos())
            .collect()
    }

    #[test]
    fn on_bin_tone_peaks_at_its_bin() {
        for m in [1, 17, 100, 207] {
            let s = range_fft(&tone(m as f64), WindowKind::Rectangular, &radar()).unwrap();
            assert_eq!(s.argmax(), m);
        }
    }

    #[test]
    fn zero_frame_is_at_floor() {
        let s = range_fft(&[0.0; FRAME_LEN], WindowKind::Hann, &radar()).unwrap();
        assert_eq!(s.bins.len(), FRAME_LEN / 2);
        assert!(s.bins.iter().all(|&b| b == DB_FLOOR));
    }

    #[test]
    fn rejects_bad_frames() {
        assert!(range_fft(&[0.0; 10], WindowKind::Hann, &radar()).is_err());
        let mut x = vec![0.0; FRAME_LEN];
        x[3] = f64::NAN;
        assert!(range_fft(&x, WindowKind::Hann, &radar()).is_err());
    }

    #[test]
    fn parseval_one_sided() {
        let x: Vec<f64> = (0..FRAME_LEN).map(|n| ((n * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let s = range_fft(&x, WindowKind::Rectangular, &radar()).unwrap();
        let p = s.linear_power();
        // Nyquist bin is not part of the one-sided spectrum; compute it directly.
        let nyquist: f64 = x.iter().enumerate().map(|(n, v)| if n % 2 == 0 { *v } else { -*v }).sum();
        let spectral = (p[0] + 2.0 * p[1..].iter().sum::<f64>() + nyquist * nyquist) / FRAME_LEN as f64;
        let energy: f64 = x.iter().map(|v| v * v).sum();
        assert!((spectral - energy).abs() / energy < 1e-6);
    }

    #[test]
    fn range_axis_matches_beat_frequency() {
        let v = radar();
        let s = range_fft(&tone(1.0), WindowKind::Hann, &v).unwrap();
        assert!((s.bin_width_hz - 20e6 / 416.0).abs() < 1e-9);
        let expected = crate::SPEED_OF_LIGHT * s.bin_width_hz / (2.0 * v.slope());
        assert!((s.range_per_bin_m - expected).abs() < 1e-12);
    }

    fn chirp_sequence(velocity_mps: f64) -> Vec<Vec<f64>> {
        let scene = RadarScene {
            victim: radar(),
            targets: vec![Target {
                range_m: 40.0,
                velocity_mps,
                amplitude: 1.0,
            }],
            interferers: vec![],
            noise_std: 0.0,
            rng_seed: 0,
        };
        (0..75)
            .map(|k| fit_to_length(&clean_beat_signal(&scene, k).unwrap(), FRAME_LEN).0)
            .collect()
    }

    #[test]
    fn static_target_sits_in_doppler_bin_zero() {
        let map = doppler_fft(&chirp_sequence(0.0), WindowKind::Hann, &radar()).unwrap();
        assert_eq!(map.peak().0, 0);
    }

    #[test]
    fn doppler_of_50_kmh() {
        let v = radar();
        let f = v.doppler_cycles_per_chirp(50.0 / 3.6);
        // 2 * 13.889 / c * 77e9 * 30e-6 (0.2139 with c rounded to 3e8).
        assert!((f - 0.2139).abs() < 1e-3, "{f}");
        let map = doppler_fft(&chirp_sequence(50.0 / 3.6), WindowKind::Hann, &v).unwrap();
        let (d, _) = map.peak();
        assert!((map.doppler_cycles(d) - f).abs() <= 0.5 / 75.0 + 1e-12);
        let recovered = v.velocity_from_doppler(map.doppler_cycles(d));
        assert!((recovered - 50.0 / 3.6).abs() < v.velocity_from_doppler(1.0 / 75.0));
    }

    #[test]
    fn negative_velocity_mirrors_doppler_bin() {
        let v = radar();
        let up = doppler_fft(&chirp_sequence(10.0), WindowKind::Hann, &v).unwrap().peak();
        let down = doppler_fft(&chirp_sequence(-10.0), WindowKind::Hann, &v).unwrap().peak();
        assert_ne!(up.0, 0);
        assert_eq!(down.0, 75 - up.0);
        assert_eq!(up.1, down.1);
    }

    #[test]
    fn doppler_rejects_wrong_chirp_count() {
        let frames = chirp_sequence(0.0);
        assert!(doppler_fft(&frames[..74], WindowKind::Hann, &radar()).is_err());
    }
}
