//! `RIMD` dataset files.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "RIMD"
//!      4     4  format version (u32)
//!      8     4  frame count (u32)
//!     12     4  frame length (u32)
//!     16     8  sample rate in Hz (f64)
//!     24     8  base seed (u64)
//!     32     …  per frame: input[len] then label[len], f64
//!      …     …  JSON lines, one metadata record per frame
//! ```
//!
//! All numbers are little-endian. Each metadata line carries a checksum over
//! the header, that frame's payload and the record text, so any flipped byte
//! is caught.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::radar::{BeatFrame, FrameRecord, RadarScene};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"RIMD";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RimdHeader {
    pub count: u32,
    pub frame_len: u32,
    pub sample_rate_hz: f64,
    pub base_seed: u64,
}

impl RimdHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(MAGIC);
        out[4..8].copy_from_slice(&VERSION.to_le_bytes());
        out[8..12].copy_from_slice(&self.count.to_le_bytes());
        out[12..16].copy_from_slice(&self.frame_len.to_le_bytes());
        out[16..24].copy_from_slice(&self.sample_rate_hz.to_le_bytes());
        out[24..32].copy_from_slice(&self.base_seed.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::format(bytes.len() as u64, "file shorter than the 32-byte header"));
        }
        if &bytes[0..4] != MAGIC {
            return Err(Error::format(0, "bad magic, not a RIMD file"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(Error::format(4, format!("unsupported version {version}, expected {VERSION}")));
        }
        let header = Self {
            count: u32_at(8),
            frame_len: u32_at(12),
            sample_rate_hz: f64::from_le_bytes(bytes[16..24].try_into().unwrap()),
            base_seed: u64::from_le_bytes(bytes[24..32].try_into().unwrap()),
        };
        if header.count == 0 {
            return Err(Error::format(8, "frame count is zero"));
        }
        if header.frame_len == 0 {
            return Err(Error::format(12, "frame length is zero"));
        }
        if !(header.sample_rate_hz.is_finite() && header.sample_rate_hz > 0.0) {
            return Err(Error::format(16, "sample rate is not a positive number"));
        }
        Ok(header)
    }

    /// Bytes of input and label for one frame.
    pub fn frame_bytes(&self) -> usize {
        2 * self.frame_len as usize * 8
    }

    pub fn payload_len(&self) -> usize {
        self.count as usize * self.frame_bytes()
    }
}

/// Per-frame provenance stored in the metadata lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameMeta {
    pub scene_id: u64,
    pub chirp_index: usize,
    pub valid_len: usize,
    pub scene: RadarScene,
}

#[derive(Serialize)]
struct MetaLineOut<'a> {
    checksum: String,
    record: &'a RawValue,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaLineIn<'a> {
    checksum: &'a str,
    #[serde(borrow)]
    record: &'a RawValue,
}

fn frame_checksum(header: &[u8], payload: &[u8], record: &str) -> String {
    let mut h = Sha256::new();
    h.update(header);
    h.update(payload);
    h.update(record.as_bytes());
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn frame_payload(frame: &BeatFrame) -> Vec<u8> {
    frame
        .input
        .iter()
        .chain(&frame.label)
        .flat_map(|v| v.to_le_bytes())
        .collect()
}

/// Streams frames to disk. Metadata lines are kept in memory and appended by
/// [`RimdWriter::finish`].
pub struct RimdWriter {
    out: BufWriter<File>,
    header: RimdHeader,
    header_bytes: [u8; HEADER_LEN],
    meta: Vec<u8>,
    written: u32,
    path: String,
}

impl RimdWriter {
    pub fn create(path: &Path, header: RimdHeader) -> Result<Self> {
        let display = path.display().to_string();
        let file = File::create(path).map_err(|e| Error::io(format!("creating {display}"), e))?;
        let mut out = BufWriter::new(file);
        let header_bytes = header.to_bytes();
        out.write_all(&header_bytes)
            .map_err(|e| Error::io(format!("writing {display}"), e))?;
        Ok(Self {
            out,
            header,
            header_bytes,
            meta: Vec::new(),
            written: 0,
            path: display,
        })
    }

    pub fn push(&mut self, record: &FrameRecord) -> Result<()> {
        let len = self.header.frame_len as usize;
        let frame = &record.frame;
        if frame.input.len() != len || frame.label.len() != len {
            return Err(Error::shape(format!("{len} samples"), frame.input.len()));
        }
        if self.written == self.header.count {
            return Err(Error::invalid("count", "more frames than announced in the header"));
        }
        let payload = frame_payload(frame);
        let meta = FrameMeta {
            scene_id: frame.scene_id,
            chirp_index: frame.chirp_index,
            valid_len: frame.valid_len,
            scene: record.scene.clone(),
        };
        let text = serde_json::to_string(&meta).map_err(|e| Error::invalid("metadata", e.to_string()))?;
        let raw = RawValue::from_string(text).map_err(|e| Error::invalid("metadata", e.to_string()))?;
        let line = MetaLineOut {
            checksum: frame_checksum(&self.header_bytes, &payload, raw.get()),
            record: &raw,
        };
        serde_json::to_writer(&mut self.meta, &line).map_err(|e| Error::invalid("metadata", e.to_string()))?;
        self.meta.push(b'\n');
        self.out
            .write_all(&payload)
            .map_err(|e| Error::io(format!("writing {}", self.path), e))?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if self.written != self.header.count {
            return Err(Error::invalid(
                "count",
                format!("header announces {} frames, {} written", self.header.count, self.written),
            ));
        }
        let ctx = format!("writing {}", self.path);
        self.out.write_all(&self.meta).map_err(|e| Error::io(ctx.clone(), e))?;
        self.out.flush().map_err(|e| Error::io(ctx, e))
    }
}

/// A fully loaded dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RimdDataset {
    pub header: RimdHeader,
    pub records: Vec<FrameRecord>,
}

impl RimdDataset {
    pub fn frames(&self) -> Vec<BeatFrame> {
        self.records.iter().map(|r| r.frame.clone()).collect()
    }
}

pub fn write_rimd(path: &Path, header: RimdHeader, records: &[FrameRecord]) -> Result<()> {
    let mut w = RimdWriter::create(path, RimdHeader { count: records.len() as u32, ..header })?;
    for r in records {
        w.push(r)?;
    }
    w.finish()
}

pub fn read_rimd(path: &Path) -> Result<RimdDataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_rimd(&bytes)
}

pub fn parse_rimd(bytes: &[u8]) -> Result<RimdDataset> {
    let header = RimdHeader::parse(bytes)?;
    let len = header.frame_len as usize;
    let frame_bytes = header.frame_bytes();
    let meta_start = HEADER_LEN + header.payload_len();
    if bytes.len() < meta_start {
        return Err(Error::format(
            bytes.len() as u64,
            format!("payload truncated, expected {} bytes before metadata", meta_start),
        ));
    }
    let header_bytes = &bytes[..HEADER_LEN];
    let mut records = Vec::with_capacity(header.count as usize);
    let mut offset = meta_start;
    for i in 0..header.count as usize {
        let rest = &bytes[offset..];
        let Some(end) = rest.iter().position(|&b| b == b'\n') else {
            return Err(Error::format(
                offset as u64,
                format!("metadata truncated at record {i} of {}", header.count),
            ));
        };
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| Error::format(offset as u64, format!("metadata record {i} is not UTF-8")))?;
        let parsed: MetaLineIn<'_> = serde_json::from_str(line)
            .map_err(|e| Error::format(offset as u64, format!("metadata record {i}: {e}")))?;
        let start = HEADER_LEN + i * frame_bytes;
        let payload = &bytes[start..start + frame_bytes];
        if frame_checksum(header_bytes, payload, parsed.record.get()) != parsed.checksum {
            return Err(Error::format(
                start as u64,
                format!("checksum mismatch for frame {i} (metadata at byte {offset})"),
            ));
        }
        let meta: FrameMeta = serde_json::from_str(parsed.record.get())
            .map_err(|e| Error::format(offset as u64, format!("metadata record {i}: {e}")))?;
        let values: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let (input, label) = values.split_at(len);
        records.push(FrameRecord {
            frame: BeatFrame {
                input: input.to_vec(),
                label: label.to_vec(),
                valid_len: meta.valid_len,
                chirp_index: meta.chirp_index,
                scene_id: meta.scene_id,
            },
            scene: meta.scene,
        });
        offset += end + 1;
    }
    if offset != bytes.len() {
        return Err(Error::format(offset as u64, "trailing bytes after the last metadata record"));
    }
    Ok(RimdDataset { header, records })
}
