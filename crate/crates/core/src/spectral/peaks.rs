use serde::{Deserialize, Serialize};

use super::RangeSpectrum;
use crate::{Error, Result};

/// Height above the spectrum median a peak must reach.
pub const PEAK_THRESHOLD_DB: f64 = 12.0;
/// A peak must strictly dominate this many bins on each side.
pub const PEAK_DOMINANCE_BINS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub bin: usize,
    pub range_m: f64,
    pub power_db: f64,
}

/// Local maxima at least [`PEAK_THRESHOLD_DB`] above the median bin,
/// strongest first.
pub fn detect_peaks(spectrum: &RangeSpectrum, max_peaks: usize) -> Result<Vec<Peak>> {
    if max_peaks == 0 {
        return Err(Error::invalid("max_peaks", "must be at least 1"));
    }
    let bins = &spectrum.bins;
    if bins.is_empty() {
        return Ok(Vec::new());
    }
    let mut sorted = bins.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };
    let threshold = median + PEAK_THRESHOLD_DB;

    let mut peaks: Vec<Peak> = (0..bins.len())
        .filter(|&i| bins[i] > threshold)
        .filter(|&i| {
            let lo = i.saturating_sub(PEAK_DOMINANCE_BINS);
            let hi = (i + PEAK_DOMINANCE_BINS).min(bins.len() - 1);
            (lo..=hi).all(|j| j == i || bins[j] < bins[i])
        })
        .map(|i| Peak {
            bin: i,
            range_m: spectrum.bin_range(i),
            power_db: bins[i],
        })
        .collect();
    peaks.sort_by(|a, b| b.power_db.total_cmp(&a.power_db).then(a.bin.cmp(&b.bin)));
    peaks.truncate(max_peaks);
    Ok(peaks)
}
