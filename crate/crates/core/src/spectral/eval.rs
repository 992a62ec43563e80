use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{detect_peaks, range_fft, srinr, RangeSpectrum, WindowKind};
use crate::mitigation::{renormalize, Mitigator};
use crate::radar::FrameRecord;
use crate::{Error, Result};

/// Frames pushed through a method at once.
const EVAL_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub window: WindowKind,
    pub max_peaks: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            window: WindowKind::Hann,
            max_peaks: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodInfo {
    pub name: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scene_id: u64,
    pub frame_index: usize,
    pub method: String,
    pub srinr_db: f64,
    pub detected_ranges_m: Vec<f64>,
}

/// SRINR of every method on every frame, and the per-method means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scenario_count: usize,
    pub methods: Vec<MethodInfo>,
    pub aggregate: BTreeMap<String, f64>,
    /// Frame-major, methods in request order.
    pub per_scenario: Vec<ScenarioResult>,
}

impl EvalReport {
    pub fn srinr_of(&self, method: &str) -> impl Iterator<Item = f64> + '_ {
        let method = method.to_string();
        self.per_scenario
            .iter()
            .filter(move |r| r.method == method)
            .map(|r| r.srinr_db)
    }
}

fn mitigate_all(method: &dyn Mitigator, records: &[FrameRecord]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(records.len());
    for chunk in records.chunks(EVAL_CHUNK) {
        let frames: Vec<&[f64]> = chunk.iter().map(|r| r.frame.input.as_slice()).collect();
        for y in method.mitigate_batch(&frames)? {
            out.push(renormalize(y)?);
        }
    }
    Ok(out)
}

/// Apply each method to each frame's interfered input and score the result
/// against the frame's true targets.
pub fn evaluate_methods(
    records: &[FrameRecord],
    methods: &[Box<dyn Mitigator>],
    options: &EvalOptions,
) -> Result<EvalReport> {
    if records.is_empty() {
        return Err(Error::invalid("dataset", "no frames to evaluate"));
    }
    if methods.is_empty() {
        return Err(Error::invalid("methods", "no methods requested"));
    }
    let outputs = methods
        .iter()
        .map(|m| mitigate_all(m.as_ref(), records))
        .collect::<Result<Vec<_>>>()?;

    let mut per_scenario = Vec::with_capacity(records.len() * methods.len());
    for (i, record) in records.iter().enumerate() {
        let victim = &record.scene.victim;
        for (method, out) in methods.iter().zip(&outputs) {
            let spectrum = range_fft(&out[i], options.window, victim)?;
            let score = srinr(&spectrum, &record.scene.targets, victim)?;
            let peaks = detect_peaks(&spectrum, options.max_peaks)?;
            per_scenario.push(ScenarioResult {
                scene_id: record.frame.scene_id,
                frame_index: i,
                method: method.name().to_string(),
                srinr_db: score,
                detected_ranges_m: peaks.iter().map(|p| p.range_m).collect(),
            });
        }
    }

    let mut aggregate = BTreeMap::new();
    for method in methods {
        let scores: Vec<f64> = per_scenario
            .iter()
            .filter(|r| r.method == method.name())
            .map(|r| r.srinr_db)
            .collect();
        aggregate.insert(method.name().to_string(), scores.iter().sum::<f64>() / scores.len() as f64);
    }

    Ok(EvalReport {
        scenario_count: records.len(),
        methods: methods
            .iter()
            .map(|m| MethodInfo {
                name: m.name().to_string(),
                label: m.label().to_string(),
            })
            .collect(),
        aggregate,
        per_scenario,
    })
}

/// Range spectra of one frame after each method, for plotting.
pub fn method_spectra(
    record: &FrameRecord,
    methods: &[Box<dyn Mitigator>],
    window: WindowKind,
) -> Result<Vec<(String, RangeSpectrum)>> {
    methods
        .iter()
        .map(|m| {
            let y = renormalize(m.mitigate(&record.frame.input)?)?;
            Ok((m.name().to_string(), range_fft(&y, window, &record.scene.victim)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mitigation::{MethodContext, MethodRegistry};
    use crate::radar::{generate_dataset, SceneBounds};

    fn records(n: usize, bounds: &SceneBounds) -> Vec<FrameRecord> {
        let mut v = Vec::new();
        generate_dataset(n, 5, bounds, |r| Ok(v.push(r))).unwrap();
        v
    }

    fn methods(names: &[&str]) -> Vec<Box<dyn Mitigator>> {
        MethodRegistry::builtin()
            .build_all(names, &MethodContext::default())
            .unwrap()
    }

    #[test]
    fn passthrough_on_clean_data_scores_the_labels() {
        let bounds = SceneBounds {
            interferers: (0, 0),
            snr_db: (400.0, 400.0),
            ..Default::default()
        };
        let recs = records(12, &bounds);
        let report = evaluate_methods(&recs, &methods(&["none"]), &EvalOptions::default()).unwrap();
        let labels: Vec<f64> = recs
            .iter()
            .map(|r| {
                let s = range_fft(&r.frame.label, WindowKind::Hann, &r.scene.victim).unwrap();
                srinr(&s, &r.scene.targets, &r.scene.victim).unwrap()
            })
            .collect();
        let mean = labels.iter().sum::<f64>() / labels.len() as f64;
        assert!((report.aggregate["none"] - mean).abs() < 1e-9);
    }

    #[test]
    fn report_shape_and_mean() {
        let recs = records(10, &SceneBounds::default());
        let report =
            evaluate_methods(&recs, &methods(&["none", "tdt", "envelope"]), &EvalOptions::default()).unwrap();
        assert_eq!(report.scenario_count, 10);
        assert_eq!(report.per_scenario.len(), 30);
        assert_eq!(report.aggregate.len(), 3);
        for (name, mean) in &report.aggregate {
            let v: Vec<f64> = report.srinr_of(name).collect();
            let recomputed = v.iter().sum::<f64>() / v.len() as f64;
            assert!((mean - recomputed).abs() < 1e-12);
        }
        assert_eq!(report.methods[2].label, "envelope (reconstruction)");
        let again =
            evaluate_methods(&recs, &methods(&["none", "tdt", "envelope"]), &EvalOptions::default()).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let recs = records(2, &SceneBounds::default());
        assert!(evaluate_methods(&[], &methods(&["none"]), &EvalOptions::default()).is_err());
        assert!(evaluate_methods(&recs, &[], &EvalOptions::default()).is_err());
    }

    #[test]
    fn spectra_per_method() {
        let recs = records(1, &SceneBounds::default());
        let s = method_spectra(&recs[0], &methods(&["none", "tdt"]), WindowKind::Hann).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].0, "none");
        assert_eq!(s[1].1.bins.len(), 208);
    }
}
