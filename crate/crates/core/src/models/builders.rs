//! Desk-scale AlexNet-like and GoogLeNet-like networks, plus the full-size
//! AlexNet shape used only for parameter accounting.

use alloc::vec;
use alloc::vec::Vec;

use super::inception::InceptionSpec;
use super::spec::{LayerKind, LayerSpec, NetworkSpec};
use crate::error::{Error, Result};

/// `[C, H, W]` input of the desk-scale networks.
pub const MINI_INPUT_SHAPE: [usize; 3] = [3, 64, 64];

/// Raw pixels are in [0, 255] before mean subtraction; this keeps the first
/// layer's input near unit scale so He initialization holds.
const PIXEL_SCALE: f64 = 1.0 / 64.0;

fn conv(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, pad: usize) -> LayerSpec {
    LayerSpec::new(LayerKind::Conv {
        in_channels,
        out_channels,
        kernel,
        stride,
        pad,
    })
}

fn relu() -> LayerSpec {
    LayerSpec::new(LayerKind::ReLU)
}

fn pool(kernel: usize, stride: usize) -> LayerSpec {
    LayerSpec::new(LayerKind::MaxPool { kernel, stride })
}

fn fc(in_features: usize, out_features: usize) -> LayerSpec {
    LayerSpec::new(LayerKind::FullyConnected {
        in_features,
        out_features,
    })
}

fn flat() -> LayerSpec {
    LayerSpec::new(LayerKind::Flatten)
}

fn softmax() -> LayerSpec {
    LayerSpec::new(LayerKind::Softmax2)
}

fn inception(
    in_channels: usize,
    branch1x1: usize,
    (reduce3x3, branch3x3): (usize, usize),
    (reduce5x5, branch5x5): (usize, usize),
    pool_proj: usize,
) -> LayerSpec {
    LayerSpec::new(LayerKind::Inception(InceptionSpec {
        in_channels,
        branch1x1,
        reduce3x3,
        branch3x3,
        reduce5x5,
        branch5x5,
        pool_proj,
    }))
}

/// Output shape of a layer prefix, validating the chain.
fn chain_shape(input_shape: &[usize], layers: &[LayerSpec]) -> Result<Vec<usize>> {
    let mut shape = input_shape.to_vec();
    for (index, layer) in layers.iter().enumerate() {
        shape = layer.kind.output_shape(&shape).map_err(|reason| Error::Layer {
            index,
            kind: layer.kind.name(),
            reason,
        })?;
    }
    Ok(shape)
}

/// Five conv layers (pools after 1, 2 and 5) then three fully-connected
/// layers. The second FC output (after its ReLU) is the feature vector.
pub fn build_anet_mini(input_shape: &[usize]) -> Result<NetworkSpec> {
    let c = *input_shape.first().ok_or_else(|| Error::invalid("empty input shape"))?;
    let trunk = vec![
        conv(c, 12, 5, 2, 2),
        relu(),
        pool(2, 2),
        conv(12, 24, 3, 1, 1),
        relu(),
        pool(2, 2),
        conv(24, 32, 3, 1, 1),
        relu(),
        conv(32, 32, 3, 1, 1),
        relu(),
        conv(32, 24, 3, 1, 1),
        relu(),
        pool(2, 2),
    ];
    let width = chain_shape(input_shape, &trunk)?.iter().product();
    let mut layers = trunk;
    layers.extend([
        flat(),
        fc(width, 128),
        relu(),
        fc(128, 64),
        relu(),
        fc(64, 2),
        softmax(),
    ]);
    NetworkSpec::new("anet_mini", input_shape, PIXEL_SCALE, layers)
}

/// Three conv layers, three inception blocks, global max-pooling and a
/// single classifier layer.
pub fn build_gnet_mini(input_shape: &[usize]) -> Result<NetworkSpec> {
    let c = *input_shape.first().ok_or_else(|| Error::invalid("empty input shape"))?;
    let mut layers = vec![
        conv(c, 12, 5, 2, 2),
        relu(),
        pool(2, 2),
        conv(12, 12, 1, 1, 0),
        relu(),
        conv(12, 24, 3, 1, 1),
        relu(),
        pool(2, 2),
        inception(24, 8, (8, 12), (4, 6), 6),
        inception(32, 12, (12, 16), (4, 8), 8),
        pool(2, 2),
        inception(44, 16, (16, 20), (4, 8), 8),
    ];
    let shape = chain_shape(input_shape, &layers)?;
    let (channels, side) = (shape[0], shape[1]);
    layers.extend([pool(side, side), flat(), fc(channels, 2), softmax()]);
    NetworkSpec::new("gnet_mini", input_shape, PIXEL_SCALE, layers)
}

/// Ungrouped single-tower AlexNet at 224x224x3 with a two-unit output.
/// Never trained here; it exists for parameter accounting.
pub fn build_anet_full_spec() -> NetworkSpec {
    let layers = vec![
        conv(3, 96, 11, 4, 2),
        relu(),
        pool(3, 2),
        conv(96, 256, 5, 1, 2),
        relu(),
        pool(3, 2),
        conv(256, 384, 3, 1, 1),
        relu(),
        conv(384, 384, 3, 1, 1),
        relu(),
        conv(384, 256, 3, 1, 1),
        relu(),
        pool(3, 2),
        flat(),
        fc(256 * 6 * 6, 4096),
        relu(),
        fc(4096, 4096),
        relu(),
        fc(4096, 2),
        softmax(),
    ];
    NetworkSpec::new("anet_full", &[3, 224, 224], 1.0, layers).expect("static AlexNet shape chains")
}

/// Looks up a desk-scale builder by network name (`anet_mini`/`anet`,
/// `gnet_mini`/`gnet`).
pub fn build_named(name: &str, input_shape: &[usize]) -> Result<NetworkSpec> {
    match name {
        "anet" | "anet_mini" => build_anet_mini(input_shape),
        "gnet" | "gnet_mini" => build_gnet_mini(input_shape),
        other => Err(Error::invalid(alloc::format!(
            "unknown network {other:?}, expected anet or gnet"
        ))),
    }
}
