//! Four-branch inception block: 1x1; 1x1 reduce then 3x3; 1x1 reduce then
//! 5x5; 3x3 max-pool then 1x1 projection. Every convolution is followed by
//! a ReLU and branch outputs are concatenated along channels.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::params::ParamMap;
use super::spec::conv_params;
use crate::error::Result;
use crate::numerics::{conv2d_backward_impl, conv2d_forward, maxpool_backward, maxpool_forward_padded, PoolIndices};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InceptionSpec {
    pub in_channels: usize,
    pub branch1x1: usize,
    pub reduce3x3: usize,
    pub branch3x3: usize,
    pub reduce5x5: usize,
    pub branch5x5: usize,
    pub pool_proj: usize,
}

impl InceptionSpec {
    pub fn out_channels(&self) -> usize {
        self.branch1x1 + self.branch3x3 + self.branch5x5 + self.pool_proj
    }

    pub(super) fn param_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let c = self.in_channels;
        let mut v = Vec::new();
        v.extend(conv_params("b1.", c, self.branch1x1, 1));
        v.extend(conv_params("b2_reduce.", c, self.reduce3x3, 1));
        v.extend(conv_params("b2.", self.reduce3x3, self.branch3x3, 3));
        v.extend(conv_params("b3_reduce.", c, self.reduce5x5, 1));
        v.extend(conv_params("b3.", self.reduce5x5, self.branch5x5, 5));
        v.extend(conv_params("b4.", c, self.pool_proj, 1));
        v
    }

    pub(super) fn output_shape(&self, input: &[usize]) -> core::result::Result<Vec<usize>, String> {
        match *input {
            [c, h, w] if c == self.in_channels => Ok(alloc::vec![self.out_channels(), h, w]),
            _ => Err(alloc::format!(
                "declares {} input channels, receives {input:?}",
                self.in_channels
            )),
        }
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub(super) struct InceptionCache {
    reduced3: Tensor,
    reduced5: Tensor,
    pooled: Tensor,
    pool_idx: PoolIndices,
    branches: [Tensor; 4],
}

fn conv_relu(x: &Tensor, p: &ParamMap, prefix: &str, pad: usize) -> Result<Tensor> {
    let w = &p[&alloc::format!("{prefix}weight")];
    let b = &p[&alloc::format!("{prefix}bias")];
    let mut y = conv2d_forward(x, w, b, 1, pad)?;
    for v in y.data_mut() {
        if *v <= 0.0 {
            *v = 0.0;
        }
    }
    Ok(y)
}

pub(super) fn forward(block: &InceptionSpec, p: &ParamMap, x: &Tensor) -> Result<(Tensor, InceptionCache)> {
    let (_, h, w) = x.dims3("inception")?;
    let b1 = conv_relu(x, p, "b1.", 0)?;
    let reduced3 = conv_relu(x, p, "b2_reduce.", 0)?;
    let b2 = conv_relu(&reduced3, p, "b2.", 1)?;
    let reduced5 = conv_relu(x, p, "b3_reduce.", 0)?;
    let b3 = conv_relu(&reduced5, p, "b3.", 2)?;
    let (pooled, pool_idx) = maxpool_forward_padded(x, 3, 1, 1)?;
    let b4 = conv_relu(&pooled, p, "b4.", 0)?;

    let mut out = Vec::with_capacity(block.out_channels() * h * w);
    for branch in [&b1, &b2, &b3, &b4] {
        out.extend_from_slice(branch.data());
    }
    let out = Tensor::new(&[block.out_channels(), h, w], out)?;
    Ok((
        out,
        InceptionCache {
            reduced3,
            reduced5,
            pooled,
            pool_idx,
            branches: [b1, b2, b3, b4],
        },
    ))
}

/// Gradient through a conv+ReLU given the post-activation output.
fn conv_relu_backward(
    input: &Tensor,
    output: &Tensor,
    upstream: &[f64],
    p: &ParamMap,
    prefix: &str,
    pad: usize,
    grads: Option<&mut ParamMap>,
    want_input: bool,
) -> Result<Option<Tensor>> {
    let masked: Vec<f64> = output
        .data()
        .iter()
        .zip(upstream)
        .map(|(&y, &u)| if y > 0.0 { u } else { 0.0 })
        .collect();
    let masked = Tensor::new(output.shape(), masked)?;
    let w = &p[&alloc::format!("{prefix}weight")];
    let (gx, pg) = conv2d_backward_impl(input, w, 1, pad, &masked, want_input)?;
    if let Some(grads) = grads {
        for (name, g) in pg {
            grads.insert(alloc::format!("{prefix}{name}"), g);
        }
    }
    Ok(gx)
}

pub(super) fn backward(
    block: &InceptionSpec,
    p: &ParamMap,
    x: &Tensor,
    cache: &InceptionCache,
    upstream: &Tensor,
    want_params: bool,
    want_input: bool,
) -> Result<(Option<Tensor>, Option<ParamMap>)> {
    let (_, h, w) = x.dims3("inception")?;
    let plane = h * w;
    let widths = [block.branch1x1, block.branch3x3, block.branch5x5, block.pool_proj];
    let mut slices = Vec::with_capacity(4);
    let mut start = 0;
    for width in widths {
        slices.push(&upstream.data()[start * plane..(start + width) * plane]);
        start += width;
    }
    let mut grads = want_params.then(BTreeMap::new);
    let [b1, b2, b3, b4] = &cache.branches;

    let need_reduce_input = want_input || want_params;
    let mut gx = Tensor::zeros(x.shape());

    if let Some(g) = conv_relu_backward(x, b1, slices[0], p, "b1.", 0, grads.as_mut(), want_input)? {
        gx.add_assign(&g)?;
    }

    let g_r3 = conv_relu_backward(
        &cache.reduced3,
        b2,
        slices[1],
        p,
        "b2.",
        1,
        grads.as_mut(),
        need_reduce_input,
    )?;
    if let Some(g_r3) = g_r3 {
        if let Some(g) = conv_relu_backward(
            x,
            &cache.reduced3,
            g_r3.data(),
            p,
            "b2_reduce.",
            0,
            grads.as_mut(),
            want_input,
        )? {
            gx.add_assign(&g)?;
        }
    }

    let g_r5 = conv_relu_backward(
        &cache.reduced5,
        b3,
        slices[2],
        p,
        "b3.",
        2,
        grads.as_mut(),
        need_reduce_input,
    )?;
    if let Some(g_r5) = g_r5 {
        if let Some(g) = conv_relu_backward(
            x,
            &cache.reduced5,
            g_r5.data(),
            p,
            "b3_reduce.",
            0,
            grads.as_mut(),
            want_input,
        )? {
            gx.add_assign(&g)?;
        }
    }

    if let Some(g_pool) = conv_relu_backward(&cache.pooled, b4, slices[3], p, "b4.", 0, grads.as_mut(), want_input)? {
        gx.add_assign(&maxpool_backward(&cache.pool_idx, &g_pool)?)?;
    }

    Ok((want_input.then_some(gx), grads))
}
