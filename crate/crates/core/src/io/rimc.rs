//! `RIMC` checkpoint files.
//!
//! ```text
//! "RIMC" | version u32 | manifest_len u64 | manifest (JSON)
//!        | blob_len u64 | blob (f64 LE) | checksum u64
//! ```
//!
//! The checksum is the first eight bytes of SHA-256 over the manifest and
//! the blob, read as a little-endian `u64`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::nn::{Architecture, CellParams, GruNetwork, LayerParams, ARCH_TAG, MERGE_MODE};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"RIMC";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Byte offset into the blob.
    pub offset: u64,
}

impl TensorEntry {
    pub fn byte_len(&self) -> u64 {
        self.shape.iter().product::<usize>() as u64 * 8
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub arch_tag: String,
    pub hidden_size: usize,
    pub num_layers: usize,
    pub seq_len: usize,
    pub merge_mode: String,
    pub dropout_rate: f64,
    pub tensors: Vec<TensorEntry>,
}

fn cell_shapes(cell: &CellParams) -> [Vec<usize>; 3] {
    [cell.w.shape().to_vec(), cell.u.shape().to_vec(), cell.b.shape().to_vec()]
}

fn network_shapes(net: &GruNetwork) -> Vec<Vec<usize>> {
    net.layers
        .iter()
        .flat_map(|l| cell_shapes(&l.forward).into_iter().chain(cell_shapes(&l.backward)))
        .collect()
}

fn checksum(manifest: &[u8], blob: &[u8]) -> u64 {
    let mut h = Sha256::new();
    h.update(manifest);
    h.update(blob);
    u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
}

/// Serialize a network. The output is a pure function of the weights.
pub fn encode_rimc(net: &GruNetwork) -> Vec<u8> {
    let mut offset = 0u64;
    let tensors = net
        .tensor_names()
        .into_iter()
        .zip(network_shapes(net))
        .map(|(name, shape)| {
            let entry = TensorEntry { name, shape, offset };
            offset += entry.byte_len();
            entry
        })
        .collect();
    let manifest = Manifest {
        arch_tag: ARCH_TAG.to_string(),
        hidden_size: net.arch.hidden_size,
        num_layers: net.arch.num_layers,
        seq_len: net.arch.seq_len,
        merge_mode: MERGE_MODE.to_string(),
        dropout_rate: net.arch.dropout_rate,
        tensors,
    };
    let manifest = serde_json::to_vec(&manifest).expect("manifest serializes");
    let blob: Vec<u8> = net
        .tensors()
        .iter()
        .flat_map(|t| t.iter().flat_map(|v| v.to_le_bytes()))
        .collect();

    let mut out = Vec::with_capacity(32 + manifest.len() + blob.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(manifest.len() as u64).to_le_bytes());
    out.extend_from_slice(&manifest);
    out.extend_from_slice(&(blob.len() as u64).to_le_bytes());
    out.extend_from_slice(&blob);
    out.extend_from_slice(&checksum(&manifest, &blob).to_le_bytes());
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(Error::format(
                self.bytes.len() as u64,
                format!("truncated: {what} needs {n} bytes at offset {}", self.pos),
            ));
        };
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_rimc(bytes: &[u8]) -> Result<GruNetwork> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4, "magic")? != MAGIC {
        return Err(Error::format(0, "bad magic, not a RIMC file"));
    }
    let version = u32::from_le_bytes(c.take(4, "version")?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::VersionMismatch {
            expected: VERSION.to_string(),
            found: version.to_string(),
        });
    }
    let manifest_len = c.u64("manifest length")?;
    let manifest_at = c.pos as u64;
    let manifest_bytes = c.take(usize::try_from(manifest_len).unwrap_or(usize::MAX), "manifest")?;
    let blob_len = c.u64("blob length")?;
    let blob = c.take(usize::try_from(blob_len).unwrap_or(usize::MAX), "weight blob")?;
    let stored = c.u64("checksum")?;
    if c.pos != bytes.len() {
        return Err(Error::format(c.pos as u64, "trailing bytes after the checksum"));
    }
    if checksum(manifest_bytes, blob) != stored {
        return Err(Error::CorruptBlob("checksum mismatch".into()));
    }
    let manifest: Manifest = serde_json::from_slice(manifest_bytes)
        .map_err(|e| Error::format(manifest_at, format!("manifest: {e}")))?;
    if manifest.arch_tag != ARCH_TAG {
        return Err(Error::VersionMismatch {
            expected: ARCH_TAG.into(),
            found: manifest.arch_tag,
        });
    }
    if manifest.merge_mode != MERGE_MODE {
        return Err(Error::VersionMismatch {
            expected: format!("merge mode {MERGE_MODE}"),
            found: manifest.merge_mode,
        });
    }
    let arch = Architecture {
        hidden_size: manifest.hidden_size,
        num_layers: manifest.num_layers,
        seq_len: manifest.seq_len,
        dropout_rate: manifest.dropout_rate,
    };
    arch.validate().map_err(|e| Error::ShapeTable(e.to_string()))?;
    let mut net = skeleton(arch)?;
    fill(&mut net, &manifest.tensors, blob)?;
    Ok(net)
}

/// Zero network with the right shapes.
fn skeleton(arch: Architecture) -> Result<GruNetwork> {
    let h = arch.hidden_size;
    let layers = (0..arch.num_layers)
        .map(|l| {
            let d = if l == 0 { 1 } else { h };
            LayerParams::new(CellParams::zeros(d, h), CellParams::zeros(d, h), l > 0)
        })
        .collect::<Result<Vec<_>>>()?;
    GruNetwork::from_layers(arch, layers)
}

fn fill(net: &mut GruNetwork, table: &[TensorEntry], blob: &[u8]) -> Result<()> {
    let names = net.tensor_names();
    let shapes = network_shapes(net);
    if table.len() != names.len() {
        return Err(Error::ShapeTable(format!(
            "{} tensors listed, architecture needs {}",
            table.len(),
            names.len()
        )));
    }
    let mut regions: Vec<(u64, u64)> = Vec::with_capacity(table.len());
    for ((entry, name), shape) in table.iter().zip(&names).zip(&shapes) {
        if &entry.name != name {
            return Err(Error::ShapeTable(format!("expected tensor `{name}`, found `{}`", entry.name)));
        }
        if &entry.shape != shape {
            return Err(Error::ShapeTable(format!(
                "tensor `{name}` has shape {:?}, architecture needs {shape:?}",
                entry.shape
            )));
        }
        let end = entry.offset.checked_add(entry.byte_len());
        match end {
            Some(end) if entry.offset % 8 == 0 && end <= blob.len() as u64 => regions.push((entry.offset, end)),
            _ => {
                return Err(Error::ShapeTable(format!(
                    "tensor `{name}` at offset {} runs outside the {}-byte blob",
                    entry.offset,
                    blob.len()
                )))
            }
        }
    }
    let mut sorted = regions.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0].1 > w[1].0) {
        return Err(Error::ShapeTable(format!(
            "tensor regions overlap at bytes {}..{}",
            w[1].0, w[0].1
        )));
    }
    for (dst, (start, end)) in net.tensors_mut().into_iter().zip(regions) {
        let src = &blob[start as usize..end as usize];
        for (d, chunk) in dst.iter_mut().zip(src.chunks_exact(8)) {
            *d = f64::from_le_bytes(chunk.try_into().unwrap());
        }
    }
    Ok(())
}

pub fn write_rimc(path: &Path, net: &GruNetwork) -> Result<()> {
    std::fs::write(path, encode_rimc(net)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_rimc(path: &Path) -> Result<GruNetwork> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    decode_rimc(&bytes)
}

/// Checksum stored in an encoded checkpoint.
pub fn stored_checksum(bytes: &[u8]) -> Option<u64> {
    let tail = bytes.len().checked_sub(8)?;
    Some(u64::from_le_bytes(bytes[tail..].try_into().ok()?))
}
