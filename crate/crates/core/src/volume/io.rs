//! On-disk volume container.
//!
//! A volume is a pair of sidecar files sharing one stem: `<name>.vcj` holds
//! a small JSON header, `<name>.vcd` holds the raw payload. Intensities are
//! 32-bit IEEE-754 little-endian floats, labels are single bytes. The
//! payload is frame-major, then HF-major, with LR varying fastest, exactly
//! matching the in-memory layout.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::types::{LabelVolume, Structure, Volume};

pub const HEADER_EXT: &str = "vcj";
pub const DATA_EXT: &str = "vcd";
const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    schema_version: u32,
    dims: [usize; 3],
    spacing_mm: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frames: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame_period_s: Option<f64>,
    dtype: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label_names: Option<Vec<String>>,
}

/// Either payload kind, as found on disk.
pub enum Loaded {
    Intensity(Volume),
    Labels(LabelVolume),
}

/// Resolve `<stem>.vcj` / `<stem>.vcd` from a path given with either
/// extension or none.
fn sidecar_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some(HEADER_EXT) | Some(DATA_EXT) => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    (
        stem.with_extension(HEADER_EXT),
        stem.with_extension(DATA_EXT),
    )
}

fn read_header(path: &Path) -> Result<Header> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let header: Header = serde_json::from_str(&text).map_err(|e| Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: format!("unsupported schema_version {}", header.schema_version),
        });
    }
    Ok(header)
}

fn expected_payload_bytes(h: &Header) -> Result<(u64, usize)> {
    let voxels = h.dims[0]
        .checked_mul(h.dims[1])
        .and_then(|n| n.checked_mul(h.dims[2]))
        .and_then(|n| n.checked_mul(h.frames.unwrap_or(1)))
        .ok_or_else(|| Error::dims(format!("dims {:?} overflow", h.dims)))?;
    let bytes_per = match h.dtype.as_str() {
        "f32le" => 4,
        "u8" => 1,
        other => {
            return Err(Error::arg(format!("unsupported dtype \"{other}\"")));
        }
    };
    Ok(((voxels * bytes_per) as u64, voxels))
}

fn read_payload(path: &Path, header: &Header, header_path: &Path) -> Result<Vec<u8>> {
    let (expected, _) = expected_payload_bytes(header).map_err(|e| match e {
        Error::InvalidArgument(reason) => Error::MalformedHeader {
            path: header_path.to_path_buf(),
            reason,
        },
        other => other,
    })?;
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.len() as u64 != expected {
        return Err(Error::PayloadLengthMismatch {
            path: path.to_path_buf(),
            expected,
            found: bytes.len() as u64,
        });
    }
    Ok(bytes)
}

/// Load either kind of volume.
pub fn load(path: impl AsRef<Path>) -> Result<Loaded> {
    let (hpath, dpath) = sidecar_paths(path.as_ref());
    let header = read_header(&hpath)?;
    let bytes = read_payload(&dpath, &header, &hpath)?;
    match (header.kind.as_str(), header.dtype.as_str()) {
        ("intensity", "f32le") => {
            let data: Vec<f32> = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            Ok(Loaded::Intensity(Volume::with_frames(
                header.dims,
                header.spacing_mm,
                header.frames,
                header.frame_period_s,
                data,
            )?))
        }
        ("labels", "u8") => Ok(Loaded::Labels(LabelVolume::with_frames(
            header.dims,
            header.spacing_mm,
            header.frames,
            header.frame_period_s,
            bytes,
        )?)),
        (kind, dtype) => Err(Error::MalformedHeader {
            path: hpath,
            reason: format!("unsupported kind/dtype combination \"{kind}\"/\"{dtype}\""),
        }),
    }
}

/// Load an intensity volume, rejecting label containers.
pub fn load_volume(path: impl AsRef<Path>) -> Result<Volume> {
    match load(&path)? {
        Loaded::Intensity(v) => Ok(v),
        Loaded::Labels(_) => Err(Error::arg(format!(
            "{} holds labels, expected an intensity volume",
            path.as_ref().display()
        ))),
    }
}

/// Load a label volume, rejecting intensity containers.
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelVolume> {
    match load(&path)? {
        Loaded::Labels(m) => Ok(m),
        Loaded::Intensity(_) => Err(Error::arg(format!(
            "{} holds intensities, expected a label volume",
            path.as_ref().display()
        ))),
    }
}

fn write_pair(hpath: &Path, dpath: &Path, header: &Header, payload: &[u8]) -> Result<()> {
    let text = serde_json::to_string_pretty(header).map_err(|source| Error::Json {
        path: hpath.to_path_buf(),
        source,
    })?;
    fs::write(hpath, text).map_err(|source| Error::Io {
        path: hpath.to_path_buf(),
        source,
    })?;
    fs::write(dpath, payload).map_err(|source| Error::Io {
        path: dpath.to_path_buf(),
        source,
    })
}

pub fn save_volume(v: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let (hpath, dpath) = sidecar_paths(path.as_ref());
    let header = Header {
        schema_version: SCHEMA_VERSION,
        dims: v.dims(),
        spacing_mm: v.spacing_mm(),
        frames: v.frames(),
        frame_period_s: v.frame_period_s(),
        dtype: "f32le".into(),
        kind: "intensity".into(),
        label_names: None,
    };
    let mut payload = Vec::with_capacity(v.data().len() * 4);
    for &x in v.data() {
        payload.extend_from_slice(&x.to_le_bytes());
    }
    write_pair(&hpath, &dpath, &header, &payload)
}

pub fn save_labels(m: &LabelVolume, path: impl AsRef<Path>) -> Result<()> {
    let (hpath, dpath) = sidecar_paths(path.as_ref());
    let header = Header {
        schema_version: SCHEMA_VERSION,
        dims: m.dims(),
        spacing_mm: m.spacing_mm(),
        frames: m.frames(),
        frame_period_s: m.frame_period_s(),
        dtype: "u8".into(),
        kind: "labels".into(),
        label_names: Some(Structure::standard_names()),
    };
    write_pair(&hpath, &dpath, &header, m.data())
}
