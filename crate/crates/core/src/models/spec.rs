use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::inception::InceptionSpec;
use crate::error::{Error, Result};
use crate::numerics::conv_output_len;

#[derive(Debug, Clone, PartialEq)]
pub enum LayerKind {
    Conv {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
    },
    ReLU,
    MaxPool {
        kernel: usize,
        stride: usize,
    },
    FullyConnected {
        in_features: usize,
        out_features: usize,
    },
    Flatten,
    Inception(InceptionSpec),
    Softmax2,
}

impl LayerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LayerKind::Conv { .. } => "Conv",
            LayerKind::ReLU => "ReLU",
            LayerKind::MaxPool { .. } => "MaxPool",
            LayerKind::FullyConnected { .. } => "FullyConnected",
            LayerKind::Flatten => "Flatten",
            LayerKind::Inception(_) => "InceptionBlock",
            LayerKind::Softmax2 => "Softmax2",
        }
    }

    /// Named parameter shapes in storage order.
    pub fn param_shapes(&self) -> Vec<(String, Vec<usize>)> {
        match *self {
            LayerKind::Conv {
                in_channels,
                out_channels,
                kernel,
                ..
            } => conv_params("", in_channels, out_channels, kernel),
            LayerKind::FullyConnected {
                in_features,
                out_features,
            } => vec![
                ("bias".to_string(), vec![out_features]),
                ("weight".to_string(), vec![out_features, in_features]),
            ],
            LayerKind::Inception(ref block) => block.param_shapes(),
            _ => Vec::new(),
        }
    }

    pub fn param_count(&self) -> u64 {
        self.param_shapes()
            .iter()
            .map(|(_, s)| s.iter().product::<usize>() as u64)
            .sum()
    }

    /// Number of weighted layers on the deepest path through this layer.
    pub fn depth(&self) -> usize {
        match self {
            LayerKind::Conv { .. } | LayerKind::FullyConnected { .. } => 1,
            LayerKind::Inception(_) => 2,
            _ => 0,
        }
    }

    /// Output shape for `input`, checking the declared input dimensions.
    pub fn output_shape(&self, input: &[usize]) -> core::result::Result<Vec<usize>, String> {
        match *self {
            LayerKind::Conv {
                in_channels,
                out_channels,
                kernel,
                stride,
                pad,
            } => {
                let [c, h, w] = dims3(input)?;
                if c != in_channels {
                    return Err(alloc::format!(
                        "declares {in_channels} input channels, receives {input:?}"
                    ));
                }
                match (
                    conv_output_len(h, kernel, stride, pad),
                    conv_output_len(w, kernel, stride, pad),
                ) {
                    (Some(oh), Some(ow)) => Ok(vec![out_channels, oh, ow]),
                    _ => Err(alloc::format!(
                        "kernel {kernel} stride {stride} does not fit input {input:?}"
                    )),
                }
            }
            LayerKind::ReLU => Ok(input.to_vec()),
            LayerKind::MaxPool { kernel, stride } => {
                let [c, h, w] = dims3(input)?;
                match (
                    conv_output_len(h, kernel, stride, 0),
                    conv_output_len(w, kernel, stride, 0),
                ) {
                    (Some(oh), Some(ow)) => Ok(vec![c, oh, ow]),
                    _ => Err(alloc::format!(
                        "window {kernel} stride {stride} does not fit input {input:?}"
                    )),
                }
            }
            LayerKind::FullyConnected {
                in_features,
                out_features,
            } => {
                if input != [in_features] {
                    return Err(alloc::format!("declares {in_features} inputs, receives {input:?}"));
                }
                Ok(vec![out_features])
            }
            LayerKind::Flatten => Ok(vec![input.iter().product()]),
            LayerKind::Inception(ref block) => block.output_shape(input),
            LayerKind::Softmax2 => {
                if input != [2] {
                    return Err(alloc::format!("needs exactly 2 logits, receives {input:?}"));
                }
                Ok(vec![2])
            }
        }
    }
}

pub(super) fn conv_params(prefix: &str, cin: usize, cout: usize, kernel: usize) -> Vec<(String, Vec<usize>)> {
    vec![
        (alloc::format!("{prefix}bias"), vec![cout]),
        (alloc::format!("{prefix}weight"), vec![cout, cin, kernel, kernel]),
    ]
}

fn dims3(input: &[usize]) -> core::result::Result<[usize; 3], String> {
    match *input {
        [c, h, w] => Ok([c, h, w]),
        _ => Err(alloc::format!("expects a [C,H,W] input, receives {input:?}")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub trainable: bool,
}

impl LayerSpec {
    pub fn new(kind: LayerKind) -> Self {
        Self { kind, trainable: true }
    }
}

/// An ordered, shape-checked layer stack ending in a two-way softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    name: String,
    input_shape: Vec<usize>,
    /// Multiplier applied to the raw input before the first layer.
    input_scale: f64,
    layers: Vec<LayerSpec>,
    shapes: Vec<Vec<usize>>,
}

impl NetworkSpec {
    pub fn new(name: &str, input_shape: &[usize], input_scale: f64, layers: Vec<LayerSpec>) -> Result<Self> {
        if !(input_scale.is_finite() && input_scale > 0.0) {
            return Err(Error::invalid("input scale must be positive and finite"));
        }
        let mut shapes = Vec::with_capacity(layers.len() + 1);
        shapes.push(input_shape.to_vec());
        for (index, layer) in layers.iter().enumerate() {
            let next = layer
                .kind
                .output_shape(shapes.last().expect("nonempty"))
                .map_err(|reason| Error::Layer {
                    index,
                    kind: layer.kind.name(),
                    reason,
                })?;
            shapes.push(next);
        }
        match layers.last() {
            Some(LayerSpec {
                kind: LayerKind::Softmax2,
                ..
            }) => {}
            _ => return Err(Error::invalid("network must end in a Softmax2 layer")),
        }
        if layers[..layers.len() - 1].iter().any(|l| l.kind == LayerKind::Softmax2) {
            return Err(Error::invalid("Softmax2 may only appear as the final layer"));
        }
        Ok(Self {
            name: name.to_string(),
            input_shape: input_shape.to_vec(),
            input_scale,
            layers,
            shapes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn input_scale(&self) -> f64 {
        self.input_scale
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// Output shape of layer `index`.
    pub fn output_shape(&self, index: usize) -> Option<&[usize]> {
        self.shapes.get(index + 1).map(Vec::as_slice)
    }

    pub fn depth(&self) -> usize {
        self.layers.iter().map(|l| l.kind.depth()).sum()
    }

    /// Index of the last FullyConnected layer (the classifier).
    pub fn final_fc_index(&self) -> Option<usize> {
        self.layers
            .iter()
            .rposition(|l| matches!(l.kind, LayerKind::FullyConnected { .. }))
    }

    /// Layer whose output feeds the final classifier.
    pub fn feature_layer(&self) -> Option<usize> {
        self.final_fc_index().and_then(|i| i.checked_sub(1))
    }

    pub fn feature_width(&self) -> Option<usize> {
        let idx = self.final_fc_index()?;
        Some(self.shapes[idx].iter().product())
    }

    /// Copy with every layer trainable (full training).
    pub fn all_trainable(&self) -> Self {
        let mut spec = self.clone();
        for layer in &mut spec.layers {
            layer.trainable = true;
        }
        spec
    }

    /// Copy where only the final FullyConnected layer is trainable.
    pub fn last_layer_only(&self) -> Self {
        let last = self.final_fc_index();
        let mut spec = self.clone();
        for (i, layer) in spec.layers.iter_mut().enumerate() {
            layer.trainable = Some(i) == last;
        }
        spec
    }

    /// Lowest index of a trainable layer that has parameters.
    pub fn first_trainable(&self) -> Option<usize> {
        self.layers.iter().position(|l| l.trainable && l.kind.param_count() > 0)
    }

    /// Two-layer spec made of the final classifier and the softmax, taking
    /// feature vectors as input.
    pub fn classifier_head(&self) -> Result<Self> {
        let idx = self
            .final_fc_index()
            .ok_or_else(|| Error::invalid("network has no FullyConnected layer"))?;
        let width = self.feature_width().expect("final fc exists");
        NetworkSpec::new(
            &alloc::format!("{}_head", self.name),
            &[width],
            1.0,
            vec![self.layers[idx].clone(), LayerSpec::new(LayerKind::Softmax2)],
        )
    }
}

/// Total parameter count over every layer.
pub fn count_parameters(spec: &NetworkSpec) -> u64 {
    spec.layers.iter().map(|l| l.kind.param_count()).sum()
}

pub fn count_trainable_parameters(spec: &NetworkSpec) -> u64 {
    spec.layers
        .iter()
        .filter(|l| l.trainable)
        .map(|l| l.kind.param_count())
        .sum()
}
