use super::{renormalize, MitigationConfig, Mitigator, Replacement};
use crate::Result;

/// Consistency factor turning a median absolute deviation into a Gaussian
/// standard deviation.
const MAD_TO_SIGMA: f64 = 1.4826;

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 0 {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    }
}

/// `1.4826 · median(|x − median(x)|)`.
pub fn robust_scale(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mut buf = x.to_vec();
    let m = median(&mut buf);
    let mut dev: Vec<f64> = x.iter().map(|v| (v - m).abs()).collect();
    MAD_TO_SIGMA * median(&mut dev)
}

/// Time-domain thresholding: samples whose magnitude exceeds `β·σ̂` are
/// treated as interference and blanked or bridged.
#[derive(Debug, Clone, Copy)]
pub struct Tdt {
    beta: f64,
    replace: Replacement,
}

impl Tdt {
    pub fn new(config: MitigationConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            beta: config.tdt_beta,
            replace: config.tdt_replace,
        })
    }

    /// Indices flagged as interference.
    pub fn flagged(&self, frame: &[f64]) -> Vec<bool> {
        let sigma = robust_scale(frame);
        let threshold = self.beta * sigma;
        frame.iter().map(|v| sigma > 0.0 && v.abs() > threshold).collect()
    }
}

impl Mitigator for Tdt {
    fn name(&self) -> &'static str {
        "tdt"
    }

    fn label(&self) -> &'static str {
        "time-domain thresholding"
    }

    fn mitigate(&self, frame: &[f64]) -> Result<Vec<f64>> {
        let flagged = self.flagged(frame);
        if !flagged.iter().any(|&f| f) {
            return Ok(frame.to_vec());
        }
        let mut out = frame.to_vec();
        match self.replace {
            Replacement::Zero => {
                for (y, _) in out.iter_mut().zip(&flagged).filter(|(_, f)| **f) {
                    *y = 0.0;
                }
            }
            Replacement::LinearInterpolate => bridge(&mut out, &flagged),
        }
        renormalize(out)
    }
}

/// Replace each flagged run by a straight line between its untouched
/// neighbours; runs touching an edge hold the single neighbour's value.
fn bridge(x: &mut [f64], flagged: &[bool]) {
    let len = x.len();
    let mut i = 0;
    while i < len {
        if !flagged[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < len && flagged[i] {
            i += 1;
        }
        let left = start.checked_sub(1).map(|j| (j, x[j]));
        let right = (i < len).then(|| (i, x[i]));
        for k in start..i {
            x[k] = match (left, right) {
                (Some((a, va)), Some((b, vb))) => va + (vb - va) * (k - a) as f64 / (b - a) as f64,
                (Some((_, v)), None) | (None, Some((_, v))) => v,
                (None, None) => 0.0,
            };
        }
    }
}
