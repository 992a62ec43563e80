use std::f64::consts::TAU;

use super::{RadarScene, Target, VictimRadar};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Beat phase (radians) of `target` at fast-time sample `n` of chirp `k`.
///
/// `2π(2R/c·f_B + 2v/c·f_B·k·T_chirp + (2αR/c + 2v/c·f_B)·n·T_s)`
pub fn beat_phase(victim: &VictimRadar, target: &Target, n: usize, k: usize) -> Result<f64> {
    victim.validate()?;
    target.validate()?;
    let samples = victim.samples_per_chirp();
    if n >= samples {
        return Err(Error::invalid(
            "n",
            format!("sample index {n} outside chirp of {samples} samples"),
        ));
    }
    Ok(beat_phase_unchecked(victim, target, n, k))
}

fn beat_phase_unchecked(victim: &VictimRadar, target: &Target, n: usize, k: usize) -> f64 {
    let fb = victim.carrier_frequency_hz;
    let delay = 2.0 * target.range_m / SPEED_OF_LIGHT;
    let doppler = 2.0 * target.velocity_mps / SPEED_OF_LIGHT * fb;
    let fast_rate = 2.0 * victim.slope() * target.range_m / SPEED_OF_LIGHT + doppler;
    TAU * (delay * fb
        + doppler * k as f64 * victim.chirp_duration_s
        + fast_rate * n as f64 * victim.sample_period())
}

/// Noise- and interference-free beat signal of chirp `k`, one value per ADC
/// sample. Targets whose beat frequency lies above the receiver low-pass
/// cutoff contribute nothing.
pub fn clean_beat_signal(scene: &RadarScene, k: usize) -> Result<Vec<f64>> {
    scene.validate()?;
    let victim = &scene.victim;
    let mut out = vec![0.0; victim.samples_per_chirp()];
    for target in &scene.targets {
        if victim.range_to_beat_frequency(target.range_m) >= victim.lpf_cutoff_hz {
            continue;
        }
        for (n, y) in out.iter_mut().enumerate() {
            *y += target.amplitude * beat_phase_unchecked(victim, target, n, k).cos();
        }
    }
    Ok(out)
}

/// Interference leaking through the receiver low-pass filter during chirp `k`.
///
/// For every interferer the instantaneous difference frequency between the
/// victim ramp and the interfering wave is integrated (trapezoidal rule) into
/// a phase; the contribution is emitted only at samples where the absolute
/// difference frequency is below the low-pass cutoff.
pub fn interference_beat(scene: &RadarScene, k: usize) -> Result<Vec<f64>> {
    scene.validate()?;
    let victim = &scene.victim;
    let len = victim.samples_per_chirp();
    let ts = victim.sample_period();
    let mut out = vec![0.0; len];
    for interferer in &scene.interferers {
        let mut phase = 0.0;
        let mut prev_df = 0.0;
        for (n, y) in out.iter_mut().enumerate() {
            let df = difference_frequency(victim, interferer, n, k);
            if n > 0 {
                phase += TAU * 0.5 * (prev_df + df) * ts;
            }
            prev_df = df;
            if df.abs() < victim.lpf_cutoff_hz {
                *y += interferer.amplitude * phase.cos();
            }
        }
    }
    Ok(out)
}

/// Sample mask of chirp `k` where at least one interferer passes the
/// low-pass filter.
pub fn interference_support(scene: &RadarScene, k: usize) -> Result<Vec<bool>> {
    scene.validate()?;
    let victim = &scene.victim;
    Ok((0..victim.samples_per_chirp())
        .map(|n| {
            scene.interferers.iter().any(|i| {
                difference_frequency(victim, i, n, k).abs() < victim.lpf_cutoff_hz
            })
        })
        .collect())
}

fn difference_frequency(
    victim: &VictimRadar,
    interferer: &super::Interferer,
    n: usize,
    k: usize,
) -> f64 {
    let fast = n as f64 * victim.sample_period();
    let t = k as f64 * victim.chirp_duration_s + fast;
    let victim_freq = victim.carrier_frequency_hz + victim.slope() * fast;
    victim_freq - interferer.instantaneous_frequency(t)
}
