//! Sequential CNN: layer descriptions, weights, traced forward pass and
//! reverse-mode gradients with respect to any layer's activations.

mod backward;
mod format;
mod forward;

use std::collections::HashSet;

pub use backward::{backprop, grad_wrt_layer};
pub use format::{encode_model, load_model, parse_model, save_model, FORMAT_VERSION};
pub use forward::{forward, ForwardTrace};

use crate::error::{Error, Result};
use crate::ops::{conv_output_extent, pool_output_extent, Pair};
use crate::tensor::Tensor;

/// Reserved layer name that addresses the raw (un-normalized) input image.
pub const INPUT_LAYER: &str = "input";

#[derive(Clone, Debug, PartialEq)]
pub struct InputSpec {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    /// Per-channel mean subtracted from raw pixels before the first layer.
    pub mean: Vec<f32>,
    /// Per-channel divisor applied after the mean.
    pub std: Vec<f32>,
}

impl InputSpec {
    pub fn shape(&self) -> [usize; 3] {
        [self.channels, self.height, self.width]
    }

    /// Input spec without preprocessing (mean 0, std 1).
    pub fn identity(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            mean: vec![0.0; channels],
            std: vec![1.0; channels],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Conv2dGeometry {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: Pair,
    pub stride: Pair,
    pub padding: Pair,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoolGeometry {
    pub kernel: Pair,
    pub stride: Pair,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseGeometry {
    pub in_features: usize,
    pub out_features: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LayerKind {
    Conv2d(Conv2dGeometry),
    Relu,
    MaxPool2d(PoolGeometry),
    Flatten,
    Dense(DenseGeometry),
}

impl LayerKind {
    pub fn tag(&self) -> &'static str {
        match self {
            LayerKind::Conv2d(_) => "conv2d",
            LayerKind::Relu => "relu",
            LayerKind::MaxPool2d(_) => "maxpool2d",
            LayerKind::Flatten => "flatten",
            LayerKind::Dense(_) => "dense",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Params {
    pub weights: Tensor,
    pub bias: Tensor,
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub name: String,
    pub kind: LayerKind,
    /// Present exactly for conv2d and dense layers.
    pub params: Option<Params>,
}

impl Layer {
    pub fn conv2d(name: impl Into<String>, geometry: Conv2dGeometry, weights: Tensor, bias: Tensor) -> Self {
        Self {
            name: name.into(),
            kind: LayerKind::Conv2d(geometry),
            params: Some(Params { weights, bias }),
        }
    }

    pub fn dense(name: impl Into<String>, weights: Tensor, bias: Tensor) -> Self {
        let (out_features, in_features) = match weights.shape() {
            [m, n] => (*m, *n),
            _ => (0, 0),
        };
        Self {
            name: name.into(),
            kind: LayerKind::Dense(DenseGeometry {
                in_features,
                out_features,
            }),
            params: Some(Params { weights, bias }),
        }
    }

    pub fn relu(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: LayerKind::Relu,
            params: None,
        }
    }

    pub fn maxpool2d(name: impl Into<String>, kernel: Pair, stride: Pair) -> Self {
        Self {
            name: name.into(),
            kind: LayerKind::MaxPool2d(PoolGeometry { kernel, stride }),
            params: None,
        }
    }

    pub fn flatten(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: LayerKind::Flatten,
            params: None,
        }
    }

    pub(crate) fn params(&self) -> &Params {
        self.params
            .as_ref()
            .expect("parameterized layer validated at construction")
    }
}

/// Immutable, validated sequential network.
#[derive(Clone, Debug)]
pub struct Model {
    input: InputSpec,
    class_count: usize,
    layers: Vec<Layer>,
    /// Output shape of every layer, in chain order.
    shapes: Vec<Vec<usize>>,
}

impl Model {
    pub fn new(input: InputSpec, class_count: usize, layers: Vec<Layer>) -> Result<Self> {
        if input.mean.len() != input.channels || input.std.len() != input.channels {
            return Err(Error::format(
                INPUT_LAYER,
                format!(
                    "mean/std need {} entries, got {}/{}",
                    input.channels,
                    input.mean.len(),
                    input.std.len()
                ),
            ));
        }
        if input.std.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::format(INPUT_LAYER, "std entries must be positive"));
        }
        if input.channels == 0 || input.height == 0 || input.width == 0 {
            return Err(Error::format(INPUT_LAYER, "input extents must be positive"));
        }
        if layers.is_empty() {
            return Err(Error::format(INPUT_LAYER, "model has no layers"));
        }

        let mut seen = HashSet::new();
        let mut shape = input.shape().to_vec();
        let mut shapes = Vec::with_capacity(layers.len());
        for layer in &layers {
            if layer.name.is_empty() || layer.name == INPUT_LAYER {
                return Err(Error::format(&layer.name, "layer name is empty or reserved"));
            }
            if !seen.insert(layer.name.as_str()) {
                return Err(Error::format(&layer.name, "duplicate layer name"));
            }
            shape = next_shape(layer, &shape)?;
            shapes.push(shape.clone());
        }
        if shape != [class_count] {
            return Err(Error::format(
                &layers.last().unwrap().name,
                format!("final output shape {shape:?} is not a {class_count}-logit vector"),
            ));
        }
        Ok(Self {
            input,
            class_count,
            layers,
            shapes,
        })
    }

    pub fn input(&self) -> &InputSpec {
        &self.input
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn output_shape(&self, layer: usize) -> &[usize] {
        &self.shapes[layer]
    }

    pub fn layer_index(&self, name: &str) -> Result<usize> {
        self.layers
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| Error::UnknownLayer { layer: name.into() })
    }

    /// Name of the last conv2d layer in the chain, if any.
    pub fn last_conv(&self) -> Option<&str> {
        self.layers
            .iter()
            .rev()
            .find(|l| matches!(l.kind, LayerKind::Conv2d(_)))
            .map(|l| l.name.as_str())
    }

    pub fn check_class(&self, class_index: usize) -> Result<()> {
        if class_index >= self.class_count {
            return Err(Error::ClassOutOfRange {
                index: class_index,
                class_count: self.class_count,
            });
        }
        Ok(())
    }
}

fn next_shape(layer: &Layer, shape: &[usize]) -> Result<Vec<usize>> {
    let err = |msg: String| Error::format(&layer.name, msg);
    let check_params = |w: &[usize], b: &[usize]| -> Result<()> {
        let p = layer
            .params
            .as_ref()
            .ok_or_else(|| err("missing weights".into()))?;
        if p.weights.shape() != w {
            return Err(err(format!(
                "weights shape {:?}, expected {w:?}",
                p.weights.shape()
            )));
        }
        if p.bias.shape() != b {
            return Err(err(format!("bias shape {:?}, expected {b:?}", p.bias.shape())));
        }
        Ok(())
    };
    match &layer.kind {
        LayerKind::Conv2d(g) => {
            let [c, h, w] = *shape else {
                return Err(err(format!("conv2d needs a [C,H,W] input, got {shape:?}")));
            };
            if c != g.in_channels {
                return Err(err(format!(
                    "in_channels {} but incoming tensor has {c} channels",
                    g.in_channels
                )));
            }
            check_params(
                &[g.out_channels, g.in_channels, g.kernel[0], g.kernel[1]],
                &[g.out_channels],
            )?;
            let oh = conv_output_extent(h, g.kernel[0], g.stride[0], g.padding[0])
                .map_err(|e| err(e.to_string()))?;
            let ow = conv_output_extent(w, g.kernel[1], g.stride[1], g.padding[1])
                .map_err(|e| err(e.to_string()))?;
            Ok(vec![g.out_channels, oh, ow])
        }
        LayerKind::MaxPool2d(g) => {
            let [c, h, w] = *shape else {
                return Err(err(format!("maxpool2d needs a [C,H,W] input, got {shape:?}")));
            };
            if layer.params.is_some() {
                return Err(err("maxpool2d takes no parameters".into()));
            }
            let oh = pool_output_extent(h, g.kernel[0], g.stride[0]).map_err(|e| err(e.to_string()))?;
            let ow = pool_output_extent(w, g.kernel[1], g.stride[1]).map_err(|e| err(e.to_string()))?;
            Ok(vec![c, oh, ow])
        }
        LayerKind::Dense(g) => {
            if shape != [g.in_features] {
                return Err(err(format!(
                    "dense expects a [{}] vector, got {shape:?}",
                    g.in_features
                )));
            }
            check_params(&[g.out_features, g.in_features], &[g.out_features])?;
            Ok(vec![g.out_features])
        }
        LayerKind::Relu | LayerKind::Flatten if layer.params.is_some() => {
            Err(err(format!("{} takes no parameters", layer.kind.tag())))
        }
        LayerKind::Relu => Ok(shape.to_vec()),
        LayerKind::Flatten => Ok(vec![shape.iter().product()]),
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(layers: Vec<Layer>, classes: usize) -> Result<Model> {
        Model::new(InputSpec::identity(1, 4, 4), classes, layers)
    }

    #[test]
    fn shapes_follow_chain() {
        let m = testing::small_cnn(1, true);
        assert_eq!(m.output_shape(0), &[4, 8, 8]);
        assert_eq!(m.output_shape(2), &[4, 4, 4]);
        assert_eq!(m.output_shape(5), &[80]);
        assert_eq!(m.output_shape(8), &[3]);
        assert_eq!(m.last_conv(), Some("conv2"));
    }

    #[test]
    fn rejects_duplicate_and_reserved_names() {
        let e = tiny(
            vec![Layer::flatten("a"), Layer::relu("a")],
            16,
        )
        .unwrap_err();
        assert!(e.to_string().contains("duplicate"));
        assert!(tiny(vec![Layer::flatten("input")], 16).is_err());
    }

    #[test]
    fn rejects_wrong_final_extent() {
        let e = tiny(vec![Layer::flatten("f")], 10).unwrap_err();
        assert!(e.to_string().contains("10-logit"));
    }

    #[test]
    fn rejects_weight_shape_mismatch() {
        let e = tiny(
            vec![
                Layer::flatten("f"),
                Layer::dense("fc", Tensor::zeros([2, 15]), Tensor::zeros([2])),
            ],
            2,
        )
        .unwrap_err();
        assert!(e.to_string().contains("fc"), "{e}");
    }
}
