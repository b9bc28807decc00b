use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;

use super::LayerGrad;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// `floor((input + 2*pad - kernel) / stride) + 1`, or `None` when the kernel
/// does not fit.
pub fn conv_output_len(input: usize, kernel: usize, stride: usize, pad: usize) -> Option<usize> {
    let padded = input + 2 * pad;
    if stride == 0 || kernel == 0 || kernel > padded {
        return None;
    }
    Some((padded - kernel) / stride + 1)
}

/// Range of output positions `o` whose input index `o*stride + offset - pad`
/// falls inside `[0, input)`.
#[inline]
fn valid_outputs(offset: usize, pad: usize, stride: usize, input: usize, output: usize) -> (usize, usize) {
    let lo = if pad > offset {
        (pad - offset).div_ceil(stride)
    } else {
        0
    };
    let reach = input + pad;
    let hi = if reach > offset {
        ((reach - offset - 1) / stride + 1).min(output)
    } else {
        0
    };
    (lo, hi.max(lo))
}

struct Geometry {
    c: usize,
    h: usize,
    w: usize,
    k: usize,
    kh: usize,
    kw: usize,
    oh: usize,
    ow: usize,
}

fn geometry(input: &Tensor, kernels: &Tensor, stride: usize, pad: usize) -> Result<Geometry> {
    let (c, h, w) = input.dims3("conv2d")?;
    let (k, kc, kh, kw) = match *kernels.shape() {
        [k, kc, kh, kw] => (k, kc, kh, kw),
        _ => return Err(Error::shape("conv2d kernels", kernels.shape(), &[0, c, 0, 0])),
    };
    if kc != c {
        return Err(Error::shape("conv2d input vs kernels", input.shape(), kernels.shape()));
    }
    if stride == 0 {
        return Err(Error::invalid("conv2d stride must be positive"));
    }
    let (oh, ow) = match (conv_output_len(h, kh, stride, pad), conv_output_len(w, kw, stride, pad)) {
        (Some(oh), Some(ow)) => (oh, ow),
        _ => {
            return Err(Error::invalid(format!(
                "conv2d kernel {kh}x{kw} larger than padded input {}x{}",
                h + 2 * pad,
                w + 2 * pad
            )))
        }
    };
    Ok(Geometry {
        c,
        h,
        w,
        k,
        kh,
        kw,
        oh,
        ow,
    })
}

pub fn conv2d_forward(input: &Tensor, kernels: &Tensor, bias: &Tensor, stride: usize, pad: usize) -> Result<Tensor> {
    let g = geometry(input, kernels, stride, pad)?;
    if bias.shape() != [g.k] {
        return Err(Error::shape("conv2d bias", bias.shape(), &[g.k]));
    }
    let x = input.data();
    let wts = kernels.data();
    let mut out = Tensor::zeros(&[g.k, g.oh, g.ow]);
    let plane = g.oh * g.ow;
    let o = out.data_mut();
    for k in 0..g.k {
        let out_k = &mut o[k * plane..(k + 1) * plane];
        out_k.fill(bias.data()[k]);
        for c in 0..g.c {
            let x_c = &x[c * g.h * g.w..(c + 1) * g.h * g.w];
            for ki in 0..g.kh {
                let (oy_lo, oy_hi) = valid_outputs(ki, pad, stride, g.h, g.oh);
                for kj in 0..g.kw {
                    let wv = wts[((k * g.c + c) * g.kh + ki) * g.kw + kj];
                    let (ox_lo, ox_hi) = valid_outputs(kj, pad, stride, g.w, g.ow);
                    if ox_lo >= ox_hi {
                        continue;
                    }
                    for oy in oy_lo..oy_hi {
                        let iy = oy * stride + ki - pad;
                        let row = &x_c[iy * g.w..(iy + 1) * g.w];
                        let dst = &mut out_k[oy * g.ow + ox_lo..oy * g.ow + ox_hi];
                        let ix0 = ox_lo * stride + kj - pad;
                        if stride == 1 {
                            let len = dst.len();
                            for (d, s) in dst.iter_mut().zip(&row[ix0..ix0 + len]) {
                                *d += wv * s;
                            }
                        } else {
                            for (d, s) in dst.iter_mut().zip(row[ix0..].iter().step_by(stride)) {
                                *d += wv * s;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn conv2d_backward(
    input: &Tensor,
    kernels: &Tensor,
    stride: usize,
    pad: usize,
    upstream: &Tensor,
) -> Result<LayerGrad> {
    let (input_grad, param_grads) = conv2d_backward_impl(input, kernels, stride, pad, upstream, true)?;
    Ok(LayerGrad {
        input_grad: input_grad.expect("input gradient requested"),
        param_grads,
    })
}

/// Backward pass; the input gradient is skipped when `want_input` is false.
pub(crate) fn conv2d_backward_impl(
    input: &Tensor,
    kernels: &Tensor,
    stride: usize,
    pad: usize,
    upstream: &Tensor,
    want_input: bool,
) -> Result<(Option<Tensor>, BTreeMap<alloc::string::String, Tensor>)> {
    let g = geometry(input, kernels, stride, pad)?;
    if upstream.shape() != [g.k, g.oh, g.ow] {
        return Err(Error::shape("conv2d upstream", upstream.shape(), &[g.k, g.oh, g.ow]));
    }
    let x = input.data();
    let wts = kernels.data();
    let up = upstream.data();
    let plane = g.oh * g.ow;
    let mut gw = Tensor::zeros(kernels.shape());
    let mut gb = Tensor::zeros(&[g.k]);
    let mut gx = want_input.then(|| Tensor::zeros(input.shape()));

    for k in 0..g.k {
        let up_k = &up[k * plane..(k + 1) * plane];
        gb.data_mut()[k] = up_k.iter().sum();
        for c in 0..g.c {
            let in_off = c * g.h * g.w;
            for ki in 0..g.kh {
                let (oy_lo, oy_hi) = valid_outputs(ki, pad, stride, g.h, g.oh);
                for kj in 0..g.kw {
                    let widx = ((k * g.c + c) * g.kh + ki) * g.kw + kj;
                    let wv = wts[widx];
                    let (ox_lo, ox_hi) = valid_outputs(kj, pad, stride, g.w, g.ow);
                    if ox_lo >= ox_hi {
                        continue;
                    }
                    let mut acc = 0.0;
                    for oy in oy_lo..oy_hi {
                        let iy = oy * stride + ki - pad;
                        let row_start = in_off + iy * g.w + ox_lo * stride + kj - pad;
                        let ups = &up_k[oy * g.ow + ox_lo..oy * g.ow + ox_hi];
                        if stride == 1 {
                            let row = &x[row_start..row_start + ups.len()];
                            acc += ups.iter().zip(row).map(|(u, v)| u * v).sum::<f64>();
                            if let Some(gx) = gx.as_mut() {
                                let dst = &mut gx.data_mut()[row_start..row_start + ups.len()];
                                for (d, u) in dst.iter_mut().zip(ups) {
                                    *d += wv * u;
                                }
                            }
                        } else {
                            for (n, u) in ups.iter().enumerate() {
                                let ix = row_start + n * stride;
                                acc += u * x[ix];
                                if let Some(gx) = gx.as_mut() {
                                    gx.data_mut()[ix] += wv * u;
                                }
                            }
                        }
                    }
                    gw.data_mut()[widx] = acc;
                }
            }
        }
    }

    let mut params = BTreeMap::new();
    params.insert("weight".to_string(), gw);
    params.insert("bias".to_string(), gb);
    Ok((gx, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_input_gives_zero_output() {
        let input = Tensor::zeros(&[1, 8, 8]);
        let kernels = Tensor::from_fn(&[4, 1, 3, 3], |i| i as f64 * 0.1 - 1.0);
        let out = conv2d_forward(&input, &kernels, &Tensor::zeros(&[4]), 1, 0).unwrap();
        assert_eq!(out.shape(), [4, 6, 6]);
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_overlap_sum() {
        let mut input = Tensor::zeros(&[1, 3, 3]);
        input.data_mut()[4] = 1.0;
        let kernels = Tensor::full(&[1, 1, 3, 3], 1.0);
        let out = conv2d_forward(&input, &kernels, &Tensor::zeros(&[1]), 1, 0).unwrap();
        assert_eq!(out.shape(), [1, 1, 1]);
        assert_eq!(out.data(), [1.0]);
    }

    #[test]
    fn channel_mismatch_names_both_shapes() {
        let input = Tensor::zeros(&[2, 5, 5]);
        let kernels = Tensor::zeros(&[1, 3, 3, 3]);
        let err = conv2d_forward(&input, &kernels, &Tensor::zeros(&[1]), 1, 0).unwrap_err();
        match err {
            Error::ShapeMismatch { left, right, .. } => {
                assert_eq!(left, vec![2, 5, 5]);
                assert_eq!(right, vec![1, 3, 3, 3]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oversized_kernel_rejected() {
        let input = Tensor::zeros(&[1, 2, 2]);
        let kernels = Tensor::zeros(&[1, 1, 5, 5]);
        assert!(conv2d_forward(&input, &kernels, &Tensor::zeros(&[1]), 1, 1).is_err());
        assert!(conv2d_forward(&input, &kernels, &Tensor::zeros(&[1]), 1, 2).is_ok());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let input = Tensor::from_fn(&[2, 5, 5], |i| (i as f64).sin());
        let kernels = Tensor::from_fn(&[3, 2, 3, 3], |i| (i as f64).cos());
        let up = Tensor::zeros(&[3, 3, 3]);
        let g = conv2d_backward(&input, &kernels, 2, 1, &up).unwrap();
        assert!(g.input_grad.data().iter().all(|&v| v == 0.0));
        assert!(g.param_grads.values().all(|t| t.data().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn backward_rejects_wrong_upstream_shape() {
        let input = Tensor::zeros(&[1, 4, 4]);
        let kernels = Tensor::zeros(&[1, 1, 3, 3]);
        assert!(conv2d_backward(&input, &kernels, 1, 0, &Tensor::zeros(&[1, 3, 3])).is_err());
    }

    #[test]
    fn output_len_uses_floor_division() {
        assert_eq!(conv_output_len(224, 11, 4, 2), Some(55));
        assert_eq!(conv_output_len(9, 3, 2, 1), Some(5));
        assert_eq!(conv_output_len(2, 3, 1, 0), None);
    }
}
