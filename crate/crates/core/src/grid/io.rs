//! Grid container files.
//!
//! A container is a TOML header holding the geometry and payload metadata.
//! The payload is the flat value array as little-endian IEEE-754 doubles,
//! either inline as base64 (`encoding = "base64"`, key `payload`) or in a
//! sibling binary file (`encoding = "file"`, key `data_file`, a bare file
//! name resolved next to the header).

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{GridGeometry, ScalarGrid};
use crate::error::{Error, Result};

const FORMAT: &str = "palpate-grid";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadEncoding {
    Base64,
    /// Raw bytes in `<header file stem>.bin` beside the header.
    SiblingFile,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: f64,
    value_count: usize,
    byte_order: String,
    encoding: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    data_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    payload: Option<String>,
}

fn to_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn from_bytes(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect()
}

pub fn write_grid(path: &Path, grid: &ScalarGrid, encoding: PayloadEncoding) -> Result<()> {
    let geom = grid.geometry();
    let bytes = to_bytes(grid.values());
    let mut header = Header {
        format: FORMAT.into(),
        version: VERSION,
        dims: geom.dims().to_vec(),
        origin: geom.origin().to_vec(),
        spacing: geom.spacing(),
        value_count: grid.values().len(),
        byte_order: "little".into(),
        encoding: String::new(),
        data_file: None,
        payload: None,
    };
    match encoding {
        PayloadEncoding::Base64 => {
            header.encoding = "base64".into();
            header.payload = Some(STANDARD.encode(&bytes));
        }
        PayloadEncoding::SiblingFile => {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::format(path, "grid path has no usable file name"))?;
            let name = format!("{stem}.bin");
            let bin_path = path.with_file_name(&name);
            fs::write(&bin_path, &bytes).map_err(|e| Error::io(&bin_path, e))?;
            header.encoding = "file".into();
            header.data_file = Some(name);
        }
    }
    let text = toml::to_string(&header).map_err(|e| Error::format(path, e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_grid(path: &Path) -> Result<ScalarGrid> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: Header = toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    if header.format != FORMAT {
        return Err(Error::format(path, format!("unknown format {:?}", header.format)));
    }
    if header.version != VERSION {
        return Err(Error::format(path, format!("unsupported version {}", header.version)));
    }
    if header.byte_order != "little" {
        return Err(Error::format(
            path,
            format!("unsupported byte order {:?}", header.byte_order),
        ));
    }
    let geometry = GridGeometry::new(&header.dims, &header.origin, header.spacing)?;
    if header.value_count != geometry.len() {
        return Err(Error::format(
            path,
            format!("value_count {} does not match dims", header.value_count),
        ));
    }
    let bytes = match header.encoding.as_str() {
        "base64" => {
            let payload = header
                .payload
                .ok_or_else(|| Error::format(path, "missing payload"))?;
            STANDARD
                .decode(payload.as_bytes())
                .map_err(|e| Error::format(path, e.to_string()))?
        }
        "file" => {
            let name = header
                .data_file
                .ok_or_else(|| Error::format(path, "missing data_file"))?;
            if Path::new(&name).components().count() != 1 {
                return Err(Error::format(path, "data_file must be a bare file name"));
            }
            let bin_path = path.with_file_name(&name);
            fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?
        }
        other => return Err(Error::format(path, format!("unknown encoding {other:?}"))),
    };
    if bytes.len() != 8 * header.value_count {
        return Err(Error::format(
            path,
            format!("payload holds {} bytes, expected {}", bytes.len(), 8 * header.value_count),
        ));
    }
    ScalarGrid::new(geometry, from_bytes(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_grid() -> impl Strategy<Value = ScalarGrid> {
        (
            prop::collection::vec(4usize..7, 2..=3),
            -10.0f64..10.0,
            1e-4f64..2.0,
        )
            .prop_flat_map(|(dims, o, h)| {
                let n: usize = dims.iter().product();
                let nd = dims.len();
                prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, n).prop_map(
                    move |values| {
                        let origin: Vec<f64> = (0..nd).map(|a| o * (a as f64 + 0.37)).collect();
                        let g = GridGeometry::new(&dims, &origin, h).unwrap();
                        ScalarGrid::new(g, values).unwrap()
                    },
                )
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_bit_exact(grid in arb_grid(), inline in any::<bool>()) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("field.toml");
            let enc = if inline { PayloadEncoding::Base64 } else { PayloadEncoding::SiblingFile };
            write_grid(&path, &grid, enc).unwrap();
            let back = read_grid(&path).unwrap();
            prop_assert_eq!(back.geometry(), grid.geometry());
            prop_assert_eq!(back.geometry().spacing().to_bits(), grid.geometry().spacing().to_bits());
            for (a, b) in back.values().iter().zip(grid.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.toml");
        let g = GridGeometry::new(&[4, 4], &[0.0, 0.0], 1.0).unwrap();
        write_grid(&path, &ScalarGrid::filled(g, 1.0), PayloadEncoding::SiblingFile).unwrap();
        let bin = dir.path().join("g.bin");
        let mut bytes = fs::read(&bin).unwrap();
        bytes.truncate(40);
        fs::write(&bin, bytes).unwrap();
        assert!(matches!(read_grid(&path), Err(Error::Format { .. })));
    }
}
