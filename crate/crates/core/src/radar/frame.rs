use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{clean_beat_signal, derive_seed, interference_beat, RadarScene};
use crate::{Error, Result, FRAME_LEN};

const NOISE_STREAM: u64 = 0x6e6f_6973_6500_0000;

/// One chirp's beat signal, cut or zero-padded to [`FRAME_LEN`] and scaled to
/// unit energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatFrame {
    /// Interfered and noisy.
    pub input: Vec<f64>,
    /// Interference- and noise-free.
    pub label: Vec<f64>,
    pub valid_len: usize,
    pub chirp_index: usize,
    pub scene_id: u64,
}

/// Cut `signal` to `len` samples or zero-pad it. Returns the padded vector
/// and the number of samples that came from `signal`.
pub fn fit_to_length(signal: &[f64], len: usize) -> (Vec<f64>, usize) {
    let valid = signal.len().min(len);
    let mut out = vec![0.0; len];
    out[..valid].copy_from_slice(&signal[..valid]);
    (out, valid)
}

/// Scale to unit energy, `Σ x² = 1`.
pub fn normalize(signal: &[f64]) -> Result<Vec<f64>> {
    let energy: f64 = signal.iter().map(|x| x * x).sum();
    if !energy.is_finite() {
        return Err(Error::invalid("signal", "non-finite energy"));
    }
    if energy == 0.0 {
        return Err(Error::CannotNormalize);
    }
    let scale = energy.sqrt().recip();
    Ok(signal.iter().map(|x| x * scale).collect())
}

/// Build the (interfered input, clean label) pair for chirp `k` of `scene`.
///
/// The noise realization is a pure function of the scene seed and `k`.
pub fn synthesize_frame(scene: &RadarScene, k: usize) -> Result<BeatFrame> {
    let clean = clean_beat_signal(scene, k)?;
    let interference = interference_beat(scene, k)?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(scene.rng_seed, NOISE_STREAM ^ k as u64));
    let noise = Normal::new(0.0, scene.noise_std)
        .map_err(|e| Error::invalid("noise_std", e.to_string()))?;
    let interfered: Vec<f64> = clean
        .iter()
        .zip(&interference)
        .map(|(c, i)| c + i + noise.sample(&mut rng))
        .collect();

    let (label, valid_len) = fit_to_length(&clean, FRAME_LEN);
    let (input, _) = fit_to_length(&interfered, FRAME_LEN);
    Ok(BeatFrame {
        input: normalize(&input)?,
        label: normalize(&label)?,
        valid_len,
        chirp_index: k,
        scene_id: scene.rng_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar::{Target, VictimRadar};

    fn scene(chirp_duration_s: f64) -> RadarScene {
        RadarScene {
            victim: VictimRadar {
                carrier_frequency_hz: 77e9,
                sweep_bandwidth_hz: 150e6,
                chirp_duration_s,
                num_chirps: 75,
                sample_rate_hz: 20e6,
                lpf_cutoff_hz: 10e6,
            },
            targets: vec![Target {
                range_m: 42.0,
                velocity_mps: 3.0,
                amplitude: 1.0,
            }],
            interferers: vec![],
            noise_std: 0.0,
            rng_seed: 11,
        }
    }

    #[test]
    fn normalize_three_four() {
        let mut x = vec![0.0; FRAME_LEN];
        x[0] = 3.0;
        x[1] = 4.0;
        let y = normalize(&x).unwrap();
        assert!((y[0] - 0.6).abs() < 1e-15);
        assert!((y[1] - 0.8).abs() < 1e-15);
        assert!(y[2..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(matches!(normalize(&[0.0; 8]), Err(Error::CannotNormalize)));
    }

    #[test]
    fn clean_scene_input_equals_label() {
        let f = synthesize_frame(&scene(30e-6), 5).unwrap();
        assert_eq!(f.input, f.label);
    }

    #[test]
    fn long_chirp_is_cut_to_frame_length() {
        // 41.6 us at 20 MHz = 832 samples.
        let s = scene(41.6e-6);
        assert_eq!(s.victim.samples_per_chirp(), 832);
        let f = synthesize_frame(&s, 0).unwrap();
        assert_eq!(f.valid_len, FRAME_LEN);
        let clean = clean_beat_signal(&s, 0).unwrap();
        let kept = normalize(&clean[..FRAME_LEN]).unwrap();
        assert_eq!(f.label, kept);
    }

    #[test]
    fn short_chirp_is_zero_padded() {
        let f = synthesize_frame(&scene(20e-6), 0).unwrap();
        assert_eq!(f.valid_len, 400);
        assert!(f.input[400..].iter().all(|&v| v == 0.0));
        let e: f64 = f.input.iter().map(|x| x * x).sum();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn targetless_scene_cannot_be_framed() {
        let mut s = scene(30e-6);
        s.targets.clear();
        assert!(matches!(synthesize_frame(&s, 0), Err(Error::CannotNormalize)));
    }

    #[test]
    fn noise_is_in_input_only_and_reproducible() {
        let mut s = scene(30e-6);
        s.noise_std = 0.1;
        let a = synthesize_frame(&s, 2).unwrap();
        let b = synthesize_frame(&s, 2).unwrap();
        assert_eq!(a, b);
        let clean = synthesize_frame(&scene(30e-6), 2).unwrap();
        assert_eq!(a.label, clean.label);
        assert_ne!(a.input, a.label);
    }
}
