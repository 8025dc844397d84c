//! Raw tensor export: a JSON header next to a little-endian f32 blob, in the
//! same spirit as the model container.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const TENSOR_FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorHeader {
    pub format_version: u64,
    pub name: String,
    pub shape: Vec<usize>,
    /// Element offset into the blob.
    pub offset: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

pub fn encode_tensor(tensor: &Tensor, name: &str, kind: Option<&str>) -> (String, Vec<u8>) {
    let header = TensorHeader {
        format_version: TENSOR_FORMAT_VERSION,
        name: name.to_string(),
        shape: tensor.shape().to_vec(),
        offset: 0,
        kind: kind.map(str::to_string),
    };
    let json = serde_json::to_string_pretty(&header).expect("header serializes") + "\n";
    let blob = tensor.data().iter().flat_map(|v| v.to_le_bytes()).collect();
    (json, blob)
}

pub fn decode_tensor(header: &str, blob: &[u8]) -> Result<(TensorHeader, Tensor)> {
    let h: TensorHeader = serde_json::from_str(header).map_err(|e| Error::format("tensor", e.to_string()))?;
    if h.format_version != TENSOR_FORMAT_VERSION {
        return Err(Error::Version {
            found: h.format_version,
            expected: TENSOR_FORMAT_VERSION,
        });
    }
    if blob.len() % 4 != 0 {
        return Err(Error::format(&h.name, "blob length is not a multiple of 4 bytes"));
    }
    let count: usize = h.shape.iter().product();
    let floats = blob.len() / 4;
    if h.offset + count != floats {
        return Err(Error::shape(format!("tensor `{}` blob", h.name), h.offset + count, floats));
    }
    let data = blob[h.offset * 4..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let t = Tensor::new(h.shape.clone(), data)?;
    Ok((h, t))
}

/// Write `<stem>.json` and `<stem>.bin`.
pub fn save_tensor(tensor: &Tensor, name: &str, kind: Option<&str>, stem: impl AsRef<Path>) -> Result<()> {
    let stem = stem.as_ref();
    let (json, blob) = encode_tensor(tensor, name, kind);
    let jp = stem.with_extension("json");
    let bp = stem.with_extension("bin");
    fs::write(&jp, json).map_err(|e| Error::io(&jp, e))?;
    fs::write(&bp, blob).map_err(|e| Error::io(&bp, e))?;
    Ok(())
}

pub fn load_tensor(stem: impl AsRef<Path>) -> Result<(TensorHeader, Tensor)> {
    let stem = stem.as_ref();
    let jp = stem.with_extension("json");
    let bp = stem.with_extension("bin");
    let json = fs::read_to_string(&jp).map_err(|e| Error::io(&jp, e))?;
    let blob = fs::read(&bp).map_err(|e| Error::io(&bp, e))?;
    decode_tensor(&json, &blob)
}
