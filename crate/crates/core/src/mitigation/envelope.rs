use super::{renormalize, MitigationConfig, Mitigator};
use crate::Result;

/// Lower bound on the envelope, to keep silent stretches silent.
pub const ENVELOPE_EPS: f64 = 1e-6;

/// Root-mean-square over a centred window of odd length `window`, with
/// mirror padding that does not repeat the edge sample.
pub fn sliding_rms(x: &[f64], window: usize) -> Vec<f64> {
    let len = x.len();
    if len == 0 {
        return Vec::new();
    }
    let half = (window / 2) as isize;
    let reflect = |i: isize| -> usize {
        let last = len as isize - 1;
        if last == 0 {
            return 0;
        }
        let period = 2 * last;
        let m = i.rem_euclid(period);
        (if m > last { period - m } else { m }) as usize
    };
    (0..len as isize)
        .map(|i| {
            let sum: f64 = (i - half..=i + half).map(|j| x[reflect(j)].powi(2)).sum();
            (sum / window as f64).sqrt()
        })
        .collect()
}

/// Threshold-free suppression: every sample is divided by the local
/// envelope, flattening interference bursts to the level of the rest.
#[derive(Debug, Clone, Copy)]
pub struct Envelope {
    window: usize,
}

impl Envelope {
    pub fn new(config: MitigationConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            window: config.envelope_window,
        })
    }
}

impl Mitigator for Envelope {
    fn name(&self) -> &'static str {
        "envelope"
    }

    fn label(&self) -> &'static str {
        "envelope (reconstruction)"
    }

    fn mitigate(&self, frame: &[f64]) -> Result<Vec<f64>> {
        let env = sliding_rms(frame, self.window);
        let out = frame
            .iter()
            .zip(&env)
            .map(|(x, e)| x / e.max(ENVELOPE_EPS))
            .collect();
        renormalize(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn envelope() -> Envelope {
        Envelope::new(MitigationConfig::default()).unwrap()
    }

    #[test]
    fn reflect_padding() {
        let r = sliding_rms(&[3.0, 4.0], 3);
        // Windows are [4,3,4] and [3,4,3].
        assert!((r[0] - (41.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((r[1] - (34.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_envelope_sinusoid_is_preserved() {
        // Five whole periods per 31-sample window: exact constant RMS.
        let x: Vec<f64> = (0..416).map(|n| (TAU * 5.0 / 31.0 * n as f64 + 0.3).cos()).collect();
        let y = envelope().mitigate(&x).unwrap();
        let interior = 15..401;
        let ratios: Vec<f64> = interior
            .filter(|&i| x[i].abs() > 0.1)
            .map(|i| y[i] / x[i])
            .collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
        assert!((hi - lo) / lo < 1e-3);
    }

    #[test]
    fn burst_is_attenuated() {
        let mut x: Vec<f64> = (0..416).map(|n| (0.9 * n as f64).sin()).collect();
        for v in &mut x[150..230] {
            *v *= 10.0;
        }
        let y = envelope().mitigate(&x).unwrap();
        let rms = |s: &[f64]| (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt();
        let before = rms(&x[165..215]) / rms(&x[20..130]);
        let after = rms(&y[165..215]) / rms(&y[20..130]);
        let attenuation = before / after;
        assert!((7.0..13.0).contains(&attenuation), "{attenuation}");
    }

    #[test]
    fn zero_frame_stays_zero() {
        let y = envelope().mitigate(&[0.0; 416]).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }
}
