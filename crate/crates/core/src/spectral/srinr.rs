use super::RangeSpectrum;
use crate::radar::{Target, VictimRadar};
use crate::{Error, Result};

/// Half-width of the cell block credited to each target.
pub const TARGET_CELLS: usize = 1;
/// Extra bins on each side of the target block excluded from the floor.
pub const GUARD_CELLS: usize = 3;

/// Signal to remaining interference-plus-noise ratio in dB: mean power of the
/// target cells over mean power of every bin outside target and guard cells.
///
/// Targets whose beat frequency lies outside the spectrum (or above the
/// receiver cutoff, where they carry no signal) are skipped.
pub fn srinr(spectrum: &RangeSpectrum, targets: &[Target], victim: &VictimRadar) -> Result<f64> {
    let len = spectrum.bins.len();
    let centers: Vec<usize> = targets
        .iter()
        .filter_map(|t| {
            let f = victim.range_to_beat_frequency(t.range_m);
            let bin = (f / spectrum.bin_width_hz).round();
            (f < victim.lpf_cutoff_hz && bin >= 0.0 && (bin as usize) < len).then_some(bin as usize)
        })
        .collect();
    if centers.is_empty() {
        return Err(Error::NoScorableTarget);
    }

    let mut role = vec![Cell::Floor; len];
    let outer = TARGET_CELLS + GUARD_CELLS;
    for &c in &centers {
        for (i, r) in role
            .iter_mut()
            .enumerate()
            .take((c + outer + 1).min(len))
            .skip(c.saturating_sub(outer))
        {
            if i.abs_diff(c) <= TARGET_CELLS {
                *r = Cell::Target;
            } else if *r == Cell::Floor {
                *r = Cell::Guard;
            }
        }
    }

    let power = spectrum.linear_power();
    let mean_of = |want: Cell| {
        let (sum, n) = power
            .iter()
            .zip(&role)
            .filter(|(_, r)| **r == want)
            .fold((0.0, 0usize), |(s, n), (p, _)| (s + p, n + 1));
        (n > 0).then(|| sum / n as f64)
    };
    let signal = mean_of(Cell::Target).ok_or(Error::NoScorableTarget)?;
    let floor = mean_of(Cell::Floor)
        .ok_or_else(|| Error::invalid("spectrum", "no bins left outside target and guard cells"))?;
    Ok(10.0 * signal.log10() - 10.0 * floor.log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Target,
    Guard,
    Floor,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar::{clean_beat_signal, fit_to_length, normalize, RadarScene};
    use crate::spectral::{range_fft, WindowKind};
    use crate::FRAME_LEN;

    fn scene(ranges: &[f64]) -> RadarScene {
        RadarScene {
            victim: VictimRadar {
                carrier_frequency_hz: 77e9,
                sweep_bandwidth_hz: 150e6,
                chirp_duration_s: 30e-6,
                num_chirps: 75,
                sample_rate_hz: 20e6,
                lpf_cutoff_hz: 10e6,
            },
            targets: ranges
                .iter()
                .map(|&r| Target {
                    range_m: r,
                    velocity_mps: 0.0,
                    amplitude: 1.0,
                })
                .collect(),
            interferers: vec![],
            noise_std: 0.0,
            rng_seed: 0,
        }
    }

    fn frame(s: &RadarScene) -> Vec<f64> {
        normalize(&fit_to_length(&clean_beat_signal(s, 0).unwrap(), FRAME_LEN).0).unwrap()
    }

    #[test]
    fn clean_tone_scores_high() {
        let s = scene(&[55.0]);
        let spec = range_fft(&frame(&s), WindowKind::Hann, &s.victim).unwrap();
        let v = srinr(&spec, &s.targets, &s.victim).unwrap();
        assert!(v > 40.0, "{v}");
    }

    #[test]
    fn scale_invariant() {
        let s = scene(&[20.0, 90.0]);
        let x = frame(&s);
        let y: Vec<f64> = x.iter().map(|v| v * 37.5).collect();
        let a = srinr(&range_fft(&x, WindowKind::Hann, &s.victim).unwrap(), &s.targets, &s.victim).unwrap();
        let b = srinr(&range_fft(&y, WindowKind::Hann, &s.victim).unwrap(), &s.targets, &s.victim).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn out_of_band_targets_are_skipped() {
        let s = scene(&[55.0]);
        let spec = range_fft(&frame(&s), WindowKind::Hann, &s.victim).unwrap();
        let far = Target {
            range_m: 1e4,
            velocity_mps: 0.0,
            amplitude: 1.0,
        };
        assert!(matches!(srinr(&spec, &[far.clone()], &s.victim), Err(Error::NoScorableTarget)));
        let with_far = [s.targets[0].clone(), far];
        let a = srinr(&spec, &with_far, &s.victim).unwrap();
        let b = srinr(&spec, &s.targets, &s.victim).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cell_geometry() {
        // Flat floor at 0 dB, 3 target cells at 30 dB: exact 30 dB.
        let mut bins = vec![0.0; 208];
        let s = scene(&[0.0]);
        let bin_width = 20e6 / 416.0;
        let range = s.victim.beat_frequency_to_range(100.0 * bin_width);
        for b in 99..=101 {
            bins[b] = 30.0;
        }
        // Guard cells are ignored whatever they hold.
        bins[97] = 50.0;
        bins[104] = 50.0;
        let spec = RangeSpectrum {
            bins,
            bin_width_hz: bin_width,
            range_per_bin_m: 0.0,
        };
        let t = Target {
            range_m: range,
            velocity_mps: 0.0,
            amplitude: 1.0,
        };
        let v = srinr(&spec, &[t], &s.victim).unwrap();
        assert!((v - 30.0).abs() < 1e-9);
    }
}
