use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::LayerGrad;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn check(input: &Tensor, weights: &Tensor) -> Result<(usize, usize)> {
    match *weights.shape() {
        [m, n] if input.shape() == [n] => Ok((m, n)),
        _ => Err(Error::shape(
            "fully-connected input vs weights",
            input.shape(),
            weights.shape(),
        )),
    }
}

/// `y = W x + b`.
pub fn fc_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (m, n) = check(input, weights)?;
    if bias.shape() != [m] {
        return Err(Error::shape("fully-connected bias", bias.shape(), &[m]));
    }
    let x = input.data();
    let out: Vec<f64> = weights
        .data()
        .chunks_exact(n)
        .zip(bias.data())
        .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
        .collect();
    Tensor::new(&[m], out)
}

pub fn fc_backward(input: &Tensor, weights: &Tensor, upstream: &Tensor) -> Result<LayerGrad> {
    let (m, n) = check(input, weights)?;
    if upstream.shape() != [m] {
        return Err(Error::shape("fully-connected upstream", upstream.shape(), &[m]));
    }
    let x = input.data();
    let up = upstream.data();
    let mut gw = Vec::with_capacity(m * n);
    for &u in up {
        gw.extend(x.iter().map(|v| u * v));
    }
    let mut gx = alloc::vec![0.0; n];
    for (row, &u) in weights.data().chunks_exact(n).zip(up) {
        for (g, w) in gx.iter_mut().zip(row) {
            *g += u * w;
        }
    }
    let mut param_grads = BTreeMap::new();
    param_grads.insert("weight".to_string(), Tensor::new(&[m, n], gw)?);
    param_grads.insert("bias".to_string(), upstream.clone());
    Ok(LayerGrad {
        input_grad: Tensor::new(&[n], gx)?,
        param_grads,
    })
}
