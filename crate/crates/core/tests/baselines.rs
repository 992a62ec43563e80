use proptest::prelude::*;
use rimnet::mitigation::{renormalize, MethodContext, MethodRegistry, MitigationConfig, Mitigator, Replacement};
use rimnet::radar::{generate_dataset, FrameRecord, SceneBounds};
use rimnet::spectral::{range_fft, srinr, WindowKind};
use rimnet::FRAME_LEN;

fn records(count: usize, seed: u64, bounds: &SceneBounds) -> Vec<FrameRecord> {
    let mut out = Vec::new();
    generate_dataset(count, seed, bounds, |r| {
        out.push(r);
        Ok(())
    })
    .unwrap();
    out
}

fn build(name: &str, config: MitigationConfig) -> Box<dyn Mitigator> {
    MethodRegistry::builtin()
        .build(name, &MethodContext { config, model: None })
        .unwrap()
}

fn score(frame: &[f64], r: &FrameRecord) -> f64 {
    let v = &r.scene.victim;
    srinr(&range_fft(frame, WindowKind::Hann, v).unwrap(), &r.scene.targets, v).unwrap()
}

/// Thresholding leaves clean frames alone. Envelope division is not held to
/// this: it flattens the beating of two close targets and squares off slow
/// tones, so it is measured in the acceptance suite instead.
#[test]
fn thresholding_is_safe_without_interference() {
    let bounds = SceneBounds {
        interferers: (0, 0),
        ..SceneBounds::default()
    };
    let recs = records(100, 51, &bounds);
    for replace in [Replacement::Zero, Replacement::LinearInterpolate] {
        let m = build("tdt", MitigationConfig { tdt_replace: replace, ..Default::default() });
        for (i, r) in recs.iter().enumerate() {
            let out = renormalize(m.mitigate(&r.frame.input).unwrap()).unwrap();
            let loss = score(&r.frame.input, r) - score(&out, r);
            assert!(loss < 1.0, "tdt ({replace:?}) loses {loss:.3} dB on clean frame {i}");
        }
    }
}

#[test]
fn outputs_have_unit_energy() {
    let recs = records(50, 52, &SceneBounds::default());
    for name in ["none", "tdt", "envelope"] {
        let m = build(name, MitigationConfig::default());
        let frames: Vec<&[f64]> = recs.iter().map(|r| r.frame.input.as_slice()).collect();
        for y in m.mitigate_batch(&frames).unwrap() {
            let y = renormalize(y).unwrap();
            let e: f64 = y.iter().map(|v| v * v).sum();
            assert!((e - 1.0).abs() < 1e-9 || e == 0.0, "{name}: energy {e}");
        }
    }
}

#[test]
fn batch_equals_single() {
    let recs = records(10, 53, &SceneBounds::default());
    for name in ["tdt", "envelope"] {
        let m = build(name, MitigationConfig::default());
        let frames: Vec<&[f64]> = recs.iter().map(|r| r.frame.input.as_slice()).collect();
        let batch = m.mitigate_batch(&frames).unwrap();
        for (f, b) in frames.iter().zip(&batch) {
            assert_eq!(&m.mitigate(f).unwrap(), b);
        }
    }
}

#[test]
fn interference_bursts_are_suppressed_on_average() {
    let recs = records(100, 54, &SceneBounds::default());
    for name in ["tdt", "envelope"] {
        let m = build(name, MitigationConfig::default());
        let mean: f64 = recs
            .iter()
            .map(|r| {
                let y = renormalize(m.mitigate(&r.frame.input).unwrap()).unwrap();
                score(&y, r) - score(&r.frame.input, r)
            })
            .sum::<f64>()
            / recs.len() as f64;
        assert!(mean > -0.5, "{name}: mean change {mean:.3} dB");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scale_equivariant(seed in 0u64..10_000, scale in 0.01f64..100.0) {
        let r = &records(1, seed, &SceneBounds::default())[0];
        let scaled: Vec<f64> = r.frame.input.iter().map(|x| x * scale).collect();
        for name in ["none", "tdt", "envelope"] {
            let m = build(name, MitigationConfig::default());
            let a = renormalize(m.mitigate(&r.frame.input).unwrap()).unwrap();
            let b = renormalize(m.mitigate(&scaled).unwrap()).unwrap();
            prop_assert_eq!(a.len(), FRAME_LEN);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9, "{}: {} vs {}", name, x, y);
            }
        }
    }
}
