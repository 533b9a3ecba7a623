//! On-disk deformation field container, mirroring the volume sidecar pair:
//! `<name>.dfj` holds the JSON header, `<name>.dfd` the raw payload. Per
//! slice the full dy plane is stored, then the full dx plane, row-major
//! (AP fastest), as 32-bit little-endian floats.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::respsim::deform::{DeformationField, SliceDeformation};

pub const FIELD_HEADER_EXT: &str = "dfj";
pub const FIELD_DATA_EXT: &str = "dfd";
const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    schema_version: u32,
    dims: [usize; 2],
    n_slices: usize,
    dtype: String,
    kind: String,
}

fn sidecar_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some(FIELD_HEADER_EXT) | Some(FIELD_DATA_EXT) => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    (
        stem.with_extension(FIELD_HEADER_EXT),
        stem.with_extension(FIELD_DATA_EXT),
    )
}

pub fn save_field(field: &DeformationField, path: impl AsRef<Path>) -> Result<()> {
    let (hpath, dpath) = sidecar_paths(path.as_ref());
    let header = FieldHeader {
        schema_version: SCHEMA_VERSION,
        dims: field.dims(),
        n_slices: field.n_slices(),
        dtype: "f32le".into(),
        kind: "deformation".into(),
    };
    let text = serde_json::to_string_pretty(&header).map_err(|source| Error::Json {
        path: hpath.clone(),
        source,
    })?;
    fs::write(&hpath, text).map_err(|source| Error::Io {
        path: hpath,
        source,
    })?;
    let plane = field.dims()[0] * field.dims()[1];
    let mut payload = Vec::with_capacity(field.n_slices() * plane * 8);
    for s in field.slices() {
        for &v in s.dy() {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        for &v in s.dx() {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(&dpath, payload).map_err(|source| Error::Io {
        path: dpath,
        source,
    })
}

pub fn load_field(path: impl AsRef<Path>) -> Result<DeformationField> {
    let (hpath, dpath) = sidecar_paths(path.as_ref());
    let text = fs::read_to_string(&hpath).map_err(|source| Error::Io {
        path: hpath.clone(),
        source,
    })?;
    let header: FieldHeader = serde_json::from_str(&text).map_err(|e| Error::MalformedHeader {
        path: hpath.clone(),
        reason: e.to_string(),
    })?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::MalformedHeader {
            path: hpath,
            reason: format!("unsupported schema_version {}", header.schema_version),
        });
    }
    if header.kind != "deformation" || header.dtype != "f32le" {
        return Err(Error::MalformedHeader {
            path: hpath,
            reason: format!(
                "unsupported kind/dtype combination \"{}\"/\"{}\"",
                header.kind, header.dtype
            ),
        });
    }
    let plane = header.dims[0] * header.dims[1];
    let expected = (header.n_slices * plane * 2 * 4) as u64;
    let bytes = fs::read(&dpath).map_err(|source| Error::Io {
        path: dpath.clone(),
        source,
    })?;
    if bytes.len() as u64 != expected {
        return Err(Error::PayloadLengthMismatch {
            path: dpath,
            expected,
            found: bytes.len() as u64,
        });
    }
    let floats: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let slices = floats
        .chunks_exact(2 * plane)
        .map(|chunk| {
            SliceDeformation::from_components(
                header.dims,
                chunk[..plane].to_vec(),
                chunk[plane..].to_vec(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    DeformationField::from_slices(slices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::respsim::deform::deformation_for_slice;

    fn sample_field() -> DeformationField {
        let slices = (0..4)
            .map(|k| deformation_for_slice(0.3 * k as f64 - 0.5, [10, 8]))
            .collect();
        DeformationField::from_slices(slices).unwrap()
    }

    #[test]
    fn field_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let field = sample_field();
        let path = dir.path().join("field");
        save_field(&field, &path).unwrap();
        assert_eq!(load_field(dir.path().join("field.dfj")).unwrap(), field);
    }

    #[test]
    fn truncated_field_payload_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let field = sample_field();
        let path = dir.path().join("f");
        save_field(&field, &path).unwrap();
        let raw = fs::read(dir.path().join("f.dfd")).unwrap();
        fs::write(dir.path().join("f.dfd"), &raw[..raw.len() - 4]).unwrap();
        assert!(matches!(
            load_field(&path),
            Err(Error::PayloadLengthMismatch { .. })
        ));
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let header = r#"{
            "schema_version": 1,
            "dims": [2, 2],
            "n_slices": 1,
            "dtype": "f32le",
            "kind": "intensity"
        }"#;
        fs::write(dir.path().join("w.dfj"), header).unwrap();
        fs::write(dir.path().join("w.dfd"), [0u8; 32]).unwrap();
        assert!(load_field(dir.path().join("w")).is_err());
    }
}
