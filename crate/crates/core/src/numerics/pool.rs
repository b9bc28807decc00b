use alloc::vec::Vec;

use super::conv_output_len;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Argmax positions recorded by a max-pool forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolIndices {
    pub input_shape: Vec<usize>,
    /// Flat input index of the winner, one per output element.
    pub argmax: Vec<usize>,
}

pub fn maxpool_forward(input: &Tensor, k: usize, stride: usize) -> Result<(Tensor, PoolIndices)> {
    maxpool_forward_padded(input, k, stride, 0)
}

/// Max pooling where padded positions never win. Ties go to the first
/// element in row-major window order.
pub fn maxpool_forward_padded(input: &Tensor, k: usize, stride: usize, pad: usize) -> Result<(Tensor, PoolIndices)> {
    if k == 0 || stride == 0 {
        return Err(Error::invalid("max-pool window and stride must be positive"));
    }
    if pad >= k {
        return Err(Error::invalid("max-pool padding must be smaller than the window"));
    }
    let (c, h, w) = input.dims3("maxpool")?;
    let (oh, ow) = match (conv_output_len(h, k, stride, pad), conv_output_len(w, k, stride, pad)) {
        (Some(oh), Some(ow)) => (oh, ow),
        _ => {
            return Err(Error::invalid(alloc::format!(
                "max-pool window {k} exceeds input {h}x{w}"
            )))
        }
    };
    let x = input.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut argmax = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for oy in 0..oh {
            let y0 = (oy * stride).saturating_sub(pad);
            let y1 = (oy * stride + k - pad).min(h);
            for ox in 0..ow {
                let x0 = (ox * stride).saturating_sub(pad);
                let x1 = (ox * stride + k - pad).min(w);
                let mut best = (ch * h + y0) * w + x0;
                for iy in y0..y1 {
                    for ix in x0..x1 {
                        let idx = (ch * h + iy) * w + ix;
                        if x[idx] > x[best] {
                            best = idx;
                        }
                    }
                }
                out.push(x[best]);
                argmax.push(best);
            }
        }
    }
    Ok((
        Tensor::new(&[c, oh, ow], out)?,
        PoolIndices {
            input_shape: input.shape().to_vec(),
            argmax,
        },
    ))
}

pub fn maxpool_backward(indices: &PoolIndices, upstream: &Tensor) -> Result<Tensor> {
    if upstream.numel() != indices.argmax.len() {
        return Err(Error::shape(
            "maxpool_backward",
            upstream.shape(),
            &[indices.argmax.len()],
        ));
    }
    let mut grad = Tensor::zeros(&indices.input_shape);
    let g = grad.data_mut();
    for (&idx, &u) in indices.argmax.iter().zip(upstream.data()) {
        g[idx] += u;
    }
    Ok(grad)
}
