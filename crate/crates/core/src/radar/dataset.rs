use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{synthesize_frame, BeatFrame, RadarScene, SceneBounds};
use crate::{Error, Result};

/// Attempts per frame before giving up on a degenerate draw.
pub const MAX_RESAMPLES: u32 = 16;

const CHIRP_STREAM: u64 = 0x6368_6972_7000_0000;

/// A generated frame together with the scene that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame: BeatFrame,
    pub scene: RadarScene,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetSummary {
    pub count: usize,
    /// Draws that could not be normalized and were redrawn.
    pub resampled: usize,
}

/// SplitMix64 finalizer over `base ^ stream`, for independent child seeds.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generate `count` frames, one random chirp of one random scene each, and
/// hand them to `sink` in order.
pub fn generate_dataset(
    count: usize,
    base_seed: u64,
    bounds: &SceneBounds,
    mut sink: impl FnMut(FrameRecord) -> Result<()>,
) -> Result<DatasetSummary> {
    if count == 0 {
        return Err(Error::invalid("count", "must be at least 1"));
    }
    bounds.validate()?;
    let mut resampled = 0;
    for index in 0..count {
        let record = draw_frame(index as u64, base_seed, bounds, &mut resampled)?;
        sink(record)?;
    }
    Ok(DatasetSummary { count, resampled })
}

fn draw_frame(
    index: u64,
    base_seed: u64,
    bounds: &SceneBounds,
    resampled: &mut usize,
) -> Result<FrameRecord> {
    for attempt in 0..u64::from(MAX_RESAMPLES) {
        let seed = derive_seed(base_seed, (index << 8) | attempt);
        let scene = bounds.sample(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, CHIRP_STREAM));
        let k = rng.gen_range(0..scene.victim.num_chirps);
        match synthesize_frame(&scene, k) {
            Ok(frame) => return Ok(FrameRecord { frame, scene }),
            Err(Error::CannotNormalize) => *resampled += 1,
            Err(e) => return Err(e),
        }
    }
    Err(Error::invalid(
        "bounds",
        format!("frame {index}: no normalizable draw after {MAX_RESAMPLES} attempts"),
    ))
}
