//! Two-file weight container: `model.json` manifest plus `model.bin`, a blob
//! of little-endian `f32` values addressed by element offsets.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Conv2dGeometry, DenseGeometry, InputSpec, Layer, LayerKind, Model, PoolGeometry};
use crate::error::{Error, Result};
use crate::ops::Pair;
use crate::tensor::Tensor;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct InputEntry {
    channels: usize,
    height: usize,
    width: usize,
    mean: Vec<f32>,
    std: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvEntry {
    name: String,
    out_channels: usize,
    in_channels: usize,
    kernel: Pair,
    stride: Pair,
    padding: Pair,
    weights_offset: usize,
    bias_offset: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DenseEntry {
    name: String,
    in_features: usize,
    out_features: usize,
    weights_offset: usize,
    bias_offset: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolEntry {
    name: String,
    kernel: Pair,
    stride: Pair,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlainEntry {
    name: String,
}

/// One tensor's slot in the blob.
struct Segment {
    layer: String,
    role: &'static str,
    offset: usize,
    shape: Vec<usize>,
}

impl Segment {
    fn len(&self) -> usize {
        self.shape.iter().product()
    }
}

fn parse_entry<T: for<'de> Deserialize<'de>>(value: Value, name: &str) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::format(name, e.to_string()))
}

/// Parse and validate a manifest against its blob bytes.
pub fn parse_model(manifest: &str, blob: &[u8]) -> Result<Model> {
    let root: Value =
        serde_json::from_str(manifest).map_err(|e| Error::format("<manifest>", e.to_string()))?;
    let version = root
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::format("<manifest>", "missing integer format_version"))?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let input: InputEntry = parse_entry(
        root.get("input").cloned().unwrap_or(Value::Null),
        "input",
    )?;
    let class_count = root
        .get("class_count")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::format("<manifest>", "missing integer class_count"))?
        as usize;
    let entries = root
        .get("layers")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::format("<manifest>", "missing layers array"))?;

    let mut kinds = Vec::with_capacity(entries.len());
    let mut segments = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        let name = entry
            .get("name")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .unwrap_or_else(|| format!("<layer {i}>"));
        let kind = entry.get("kind").and_then(Value::as_str).unwrap_or("");
        let mut fields = entry.clone();
        if let Some(obj) = fields.as_object_mut() {
            obj.remove("kind");
        }
        let layer_kind = match kind {
            "conv2d" => {
                let c: ConvEntry = parse_entry(fields, &name)?;
                segments.push(Segment {
                    layer: name.clone(),
                    role: "weights",
                    offset: c.weights_offset,
                    shape: vec![c.out_channels, c.in_channels, c.kernel[0], c.kernel[1]],
                });
                segments.push(Segment {
                    layer: name.clone(),
                    role: "bias",
                    offset: c.bias_offset,
                    shape: vec![c.out_channels],
                });
                LayerKind::Conv2d(Conv2dGeometry {
                    in_channels: c.in_channels,
                    out_channels: c.out_channels,
                    kernel: c.kernel,
                    stride: c.stride,
                    padding: c.padding,
                })
            }
            "dense" => {
                let d: DenseEntry = parse_entry(fields, &name)?;
                segments.push(Segment {
                    layer: name.clone(),
                    role: "weights",
                    offset: d.weights_offset,
                    shape: vec![d.out_features, d.in_features],
                });
                segments.push(Segment {
                    layer: name.clone(),
                    role: "bias",
                    offset: d.bias_offset,
                    shape: vec![d.out_features],
                });
                LayerKind::Dense(DenseGeometry {
                    in_features: d.in_features,
                    out_features: d.out_features,
                })
            }
            "maxpool2d" => {
                let p: PoolEntry = parse_entry(fields, &name)?;
                LayerKind::MaxPool2d(PoolGeometry {
                    kernel: p.kernel,
                    stride: p.stride,
                })
            }
            "relu" => {
                parse_entry::<PlainEntry>(fields, &name)?;
                LayerKind::Relu
            }
            "flatten" => {
                parse_entry::<PlainEntry>(fields, &name)?;
                LayerKind::Flatten
            }
            other => {
                return Err(Error::format(name, format!("unknown layer kind `{other}`")));
            }
        };
        kinds.push((name, layer_kind));
    }

    let values = read_blob(blob, &segments)?;

    let mut tensors = segments.into_iter().map(|s| {
        let data = values[s.offset..s.offset + s.len()].to_vec();
        Tensor::new(s.shape, data).expect("segment length checked")
    });
    let layers = kinds
        .into_iter()
        .map(|(name, kind)| {
            let params = match kind {
                LayerKind::Conv2d(_) | LayerKind::Dense(_) => {
                    let weights = tensors.next().expect("weights segment");
                    let bias = tensors.next().expect("bias segment");
                    Some(super::Params { weights, bias })
                }
                _ => None,
            };
            Layer { name, kind, params }
        })
        .collect();

    Model::new(
        InputSpec {
            channels: input.channels,
            height: input.height,
            width: input.width,
            mean: input.mean,
            std: input.std,
        },
        class_count,
        layers,
    )
}

/// Decode the blob and check that the declared segments tile it exactly.
fn read_blob(blob: &[u8], segments: &[Segment]) -> Result<Vec<f32>> {
    let last_layer = || {
        segments
            .iter()
            .max_by_key(|s| s.offset)
            .map_or("<blob>".to_owned(), |s| s.layer.clone())
    };
    if blob.len() % 4 != 0 {
        return Err(Error::format(
            last_layer(),
            format!("truncated blob: {} bytes is not a whole number of f32 values", blob.len()),
        ));
    }
    let total = blob.len() / 4;

    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by_key(|&i| segments[i].offset);
    let mut cursor = 0;
    for (rank, &i) in order.iter().enumerate() {
        let s = &segments[i];
        if s.offset != cursor {
            return Err(Error::format(
                &s.layer,
                format!(
                    "{} offset {} does not follow the previous segment (expected {cursor})",
                    s.role, s.offset
                ),
            ));
        }
        let end = order
            .get(rank + 1)
            .map_or(total, |&j| segments[j].offset);
        let available = end.saturating_sub(s.offset);
        let is_last = rank + 1 == order.len();
        if is_last && available < s.len() {
            return Err(Error::format(
                &s.layer,
                format!(
                    "truncated blob: {} needs {} values at offset {}, only {available} present",
                    s.role,
                    s.len(),
                    s.offset
                ),
            ));
        }
        if available != s.len() {
            return Err(Error::format(
                &s.layer,
                format!(
                    "{} declared with shape {:?} ({} values) but its blob segment holds {available}",
                    s.role,
                    s.shape,
                    s.len()
                ),
            ));
        }
        cursor = s.offset + s.len();
    }
    if cursor != total {
        return Err(Error::format(
            last_layer(),
            format!("blob holds {total} values but the manifest declares {cursor}"),
        ));
    }

    Ok(blob
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect())
}

pub fn load_model(manifest_path: impl AsRef<Path>, blob_path: impl AsRef<Path>) -> Result<Model> {
    let manifest_path = manifest_path.as_ref();
    let blob_path = blob_path.as_ref();
    let manifest = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let blob = fs::read(blob_path).map_err(|e| Error::io(blob_path, e))?;
    parse_model(&manifest, &blob)
}

/// Serialize a model; parameters are laid out in layer order, weights then bias.
pub fn encode_model(model: &Model) -> (String, Vec<u8>) {
    let mut blob: Vec<u8> = Vec::new();
    let mut offset = 0usize;
    let mut push = |t: &Tensor, blob: &mut Vec<u8>| {
        let at = offset;
        offset += t.len();
        for v in t.data() {
            blob.extend_from_slice(&v.to_le_bytes());
        }
        at
    };
    let mut layers = Vec::new();
    for l in model.layers() {
        let mut entry = match &l.kind {
            LayerKind::Conv2d(g) => {
                let p = l.params();
                let w = push(&p.weights, &mut blob);
                let b = push(&p.bias, &mut blob);
                serde_json::to_value(ConvEntry {
                    name: l.name.clone(),
                    out_channels: g.out_channels,
                    in_channels: g.in_channels,
                    kernel: g.kernel,
                    stride: g.stride,
                    padding: g.padding,
                    weights_offset: w,
                    bias_offset: b,
                })
            }
            LayerKind::Dense(g) => {
                let p = l.params();
                let w = push(&p.weights, &mut blob);
                let b = push(&p.bias, &mut blob);
                serde_json::to_value(DenseEntry {
                    name: l.name.clone(),
                    in_features: g.in_features,
                    out_features: g.out_features,
                    weights_offset: w,
                    bias_offset: b,
                })
            }
            LayerKind::MaxPool2d(g) => serde_json::to_value(PoolEntry {
                name: l.name.clone(),
                kernel: g.kernel,
                stride: g.stride,
            }),
            LayerKind::Relu | LayerKind::Flatten => serde_json::to_value(PlainEntry {
                name: l.name.clone(),
            }),
        }
        .expect("manifest entries serialize");
        entry
            .as_object_mut()
            .unwrap()
            .insert("kind".into(), Value::from(l.kind.tag()));
        layers.push(entry);
    }
    let spec = model.input();
    let manifest = serde_json::json!({
        "format_version": FORMAT_VERSION,
        "input": InputEntry {
            channels: spec.channels,
            height: spec.height,
            width: spec.width,
            mean: spec.mean.clone(),
            std: spec.std.clone(),
        },
        "class_count": model.class_count(),
        "layers": layers,
    });
    (
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
        blob,
    )
}

pub fn save_model(model: &Model, manifest_path: impl AsRef<Path>, blob_path: impl AsRef<Path>) -> Result<()> {
    let (manifest, blob) = encode_model(model);
    let manifest_path = manifest_path.as_ref();
    let blob_path = blob_path.as_ref();
    fs::write(manifest_path, manifest).map_err(|e| Error::io(manifest_path, e))?;
    fs::write(blob_path, blob).map_err(|e| Error::io(blob_path, e))?;
    Ok(())
}
