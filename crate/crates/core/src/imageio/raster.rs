//! `ERSF1` rasters and `ERSL1` label files.
//!
//! Both formats are an ASCII header line followed by a little-endian
//! payload in `(row, col, channel)` order:
//!
//! ```text
//! ERSF1 <rows> <cols> <bands>\n   then rows·cols·bands f32
//! ERSL1 <rows> <cols>\n           then rows·cols u16
//! ```

use std::path::Path;

use super::{FeatureMap, LabelMap};
use crate::util::{read_file, write_atomic};
use crate::{Error, Result};

const RASTER_MAGIC: &str = "ERSF1";
const LABEL_MAGIC: &str = "ERSL1";
const MAX_HEADER: usize = 256;

/// Writes a raster. Values are stored as `f32`, so a read-back map equals the
/// original up to single-precision rounding.
pub fn write_raster(map: &FeatureMap, path: impl AsRef<Path>) -> Result<()> {
    let (r, c, b) = map.dim();
    let mut bytes = format!("{RASTER_MAGIC} {r} {c} {b}\n").into_bytes();
    bytes.reserve(r * c * b * 4);
    for &v in map.as_slice() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    write_atomic(path.as_ref(), &bytes)
}

pub fn read_raster(path: impl AsRef<Path>) -> Result<FeatureMap> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let (dims, payload) = parse_header(path, &bytes, RASTER_MAGIC, 3)?;
    let (r, c, b) = (dims[0], dims[1], dims[2]);
    let expected = r * c * b * 4;
    if payload.len() != expected {
        return Err(Error::TruncatedPayload {
            path: path.to_path_buf(),
            expected,
            found: payload.len(),
        });
    }
    let values = payload
        .chunks_exact(4)
        .map(|ch| f32::from_le_bytes([ch[0], ch[1], ch[2], ch[3]]) as f64)
        .collect();
    FeatureMap::from_vec(r, c, b, values)
}

pub fn write_labels(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = format!("{LABEL_MAGIC} {} {}\n", labels.rows(), labels.cols()).into_bytes();
    for &l in labels.labels() {
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    write_atomic(path.as_ref(), &bytes)
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let (dims, payload) = parse_header(path, &bytes, LABEL_MAGIC, 2)?;
    let (r, c) = (dims[0], dims[1]);
    let expected = r * c * 2;
    if payload.len() != expected {
        return Err(Error::TruncatedPayload {
            path: path.to_path_buf(),
            expected,
            found: payload.len(),
        });
    }
    let labels = payload
        .chunks_exact(2)
        .map(|ch| u16::from_le_bytes([ch[0], ch[1]]))
        .collect();
    LabelMap::new(r, c, labels)
}

fn parse_header<'a>(
    path: &Path,
    bytes: &'a [u8],
    magic: &str,
    n_dims: usize,
) -> Result<(Vec<usize>, &'a [u8])> {
    let malformed = |reason: String| Error::MalformedHeader {
        path: path.to_path_buf(),
        reason,
    };
    let end = bytes
        .iter()
        .take(MAX_HEADER)
        .position(|&b| b == b'\n')
        .ok_or_else(|| malformed("no header line".into()))?;
    let line = std::str::from_utf8(&bytes[..end]).map_err(|_| malformed("header is not ASCII".into()))?;
    let mut tokens = line.split(' ');
    match tokens.next() {
        Some(m) if m == magic => {}
        other => return Err(malformed(format!("expected magic {magic}, found {other:?}"))),
    }
    let dims = tokens
        .map(|t| t.parse::<usize>().map_err(|_| malformed(format!("bad dimension {t:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if dims.len() != n_dims {
        return Err(malformed(format!("expected {n_dims} dimensions, found {}", dims.len())));
    }
    if dims.contains(&0) {
        return Err(malformed("zero-sized dimension".into()));
    }
    Ok((dims, &bytes[end + 1..]))
}
