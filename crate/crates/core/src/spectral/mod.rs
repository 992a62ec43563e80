//! Range and range-Doppler spectra, peak picking and the SRINR score.

mod eval;
mod fft;
mod peaks;
mod srinr;

pub use eval::{evaluate_methods, method_spectra, EvalOptions, EvalReport, MethodInfo, ScenarioResult};
pub use fft::{doppler_fft, range_fft, RangeDopplerMap, RangeSpectrum, WindowKind, DB_FLOOR};
pub use peaks::{detect_peaks, Peak, PEAK_DOMINANCE_BINS, PEAK_THRESHOLD_DB};
pub use srinr::{srinr, GUARD_CELLS, TARGET_CELLS};
