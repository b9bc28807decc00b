//! Test-only oracles: central finite differences, naive reference kernels,
//! seeded random tensors.

#![allow(dead_code)]

use convfuse_core::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-6;
pub const GRAD_REL_TOL: f64 = 1e-4;
/// Denominator floor so gradients that are zero up to finite-difference
/// noise do not count as relative failures.
pub const REL_FLOOR: f64 = 1e-5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    Tensor::from_fn(shape, |_| rng.random_range(-1.0..1.0))
}

/// Central difference of `f` with respect to every element of `x`.
pub fn finite_diff(x: &Tensor, mut f: impl FnMut(&Tensor) -> f64) -> Vec<f64> {
    let mut probe = x.clone();
    (0..x.numel())
        .map(|i| {
            let orig = probe.data()[i];
            probe.data_mut()[i] = orig + FD_STEP;
            let up = f(&probe);
            probe.data_mut()[i] = orig - FD_STEP;
            let down = f(&probe);
            probe.data_mut()[i] = orig;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(REL_FLOOR))
        .fold(0.0, f64::max)
}

/// Weighted sum `<weights, y>`; its gradient with respect to `y` is
/// `weights`.
pub fn project(y: &Tensor, weights: &Tensor) -> f64 {
    y.data().iter().zip(weights.data()).map(|(a, b)| a * b).sum()
}

/// Six nested loops, bounds-checked zero padding, bias added last.
pub fn naive_conv(input: &Tensor, kernels: &Tensor, bias: &Tensor, stride: usize, pad: usize) -> Tensor {
    let [c, h, w] = input.shape().try_into().unwrap();
    let [k, _, kh, kw] = kernels.shape().try_into().unwrap();
    let oh = (h + 2 * pad - kh) / stride + 1;
    let ow = (w + 2 * pad - kw) / stride + 1;
    let mut out = Tensor::zeros(&[k, oh, ow]);
    for ko in 0..k {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = 0.0;
                for ci in 0..c {
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let iy = (oy * stride + ky) as isize - pad as isize;
                            let ix = (ox * stride + kx) as isize - pad as isize;
                            if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                continue;
                            }
                            acc += kernels.data()[((ko * c + ci) * kh + ky) * kw + kx]
                                * input.data()[(ci * h + iy as usize) * w + ix as usize];
                        }
                    }
                }
                out.data_mut()[(ko * oh + oy) * ow + ox] = acc + bias.data()[ko];
            }
        }
    }
    out
}

pub fn naive_maxpool(input: &Tensor, k: usize, stride: usize) -> Tensor {
    let [c, h, w] = input.shape().try_into().unwrap();
    let oh = (h - k) / stride + 1;
    let ow = (w - k) / stride + 1;
    Tensor::from_fn(&[c, oh, ow], |i| {
        let (ch, rest) = (i / (oh * ow), i % (oh * ow));
        let (oy, ox) = (rest / ow, rest % ow);
        let mut m = f64::NEG_INFINITY;
        for y in oy * stride..oy * stride + k {
            for x in ox * stride..ox * stride + k {
                m = m.max(input.data()[(ch * h + y) * w + x]);
            }
        }
        m
    })
}

use convfuse_core::models::{backward, forward, ModelParams, NetworkSpec};
use convfuse_core::ClassLabel;

fn loss_of(spec: &NetworkSpec, params: &ModelParams, input: &Tensor, label: ClassLabel) -> f64 {
    let (_, cache) = forward(spec, params, input).unwrap();
    convfuse_core::models::cached_loss(&cache, label)
}

/// Worst relative error between [`backward`] and central differences of the
/// loss over every trainable parameter. Returns the error and how many
/// scalars were checked.
pub fn model_grad_error(spec: &NetworkSpec, params: &ModelParams, input: &Tensor, label: ClassLabel) -> (f64, usize) {
    let (_, cache) = forward(spec, params, input).unwrap();
    let grads = backward(spec, params, &cache, label).unwrap();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (i, layer) in spec.layers().iter().enumerate() {
        if !layer.trainable || layer.kind.param_count() == 0 {
            continue;
        }
        for (name, tensor) in params.layer(i) {
            let analytic = grads.get(i, name).expect("gradient for trainable parameter");
            let numeric = finite_diff(tensor, |t| {
                let mut p = params.clone();
                *p.layer_mut(i).get_mut(name).unwrap() = t.clone();
                loss_of(spec, &p, input, label)
            });
            worst = worst.max(max_rel_err(analytic.data(), &numeric));
            checked += numeric.len();
        }
    }
    (worst, checked)
}

/// He-initialized weights with biases drawn from [-0.1, 0.1], so no ReLU
/// input sits exactly on its kink and the softmax stays unsaturated.
pub fn random_params(spec: &NetworkSpec, seed: u64) -> ModelParams {
    let mut r = rng(seed);
    let mut p = ModelParams::init(spec, seed);
    for i in 0..spec.layers().len() {
        for (name, t) in p.layer_mut(i).iter_mut() {
            if name.ends_with("bias") {
                *t = random_tensor(&mut r, t.shape());
                t.scale(0.1);
            }
        }
    }
    p
}

/// Rule evaluator written directly from the voting rule: count frames whose
/// benign score reaches the threshold, majority wins, equal counts go to
/// the larger class score sum, equal sums to benign.
pub fn brute_force_vote(benign_scores: &[f64], threshold: f64) -> ClassLabel {
    let benign_votes = benign_scores.iter().filter(|&&b| b >= threshold / 100.0).count();
    let porn_votes = benign_scores.len() - benign_votes;
    if benign_votes != porn_votes {
        return if benign_votes > porn_votes {
            ClassLabel::Benign
        } else {
            ClassLabel::Porn
        };
    }
    let b: f64 = benign_scores.iter().sum();
    let p: f64 = benign_scores.iter().map(|x| 1.0 - x).sum();
    if p > b {
        ClassLabel::Porn
    } else {
        ClassLabel::Benign
    }
}

/// Every sequence of length `n` over `grid`, in lexicographic order.
pub fn grid_sequences(grid: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                grid.iter().map(move |&g| {
                    let mut s = prefix.clone();
                    s.push(g);
                    s
                })
            })
            .collect();
    }
    out
}

pub fn sp(benign: f64) -> convfuse_core::ScorePair {
    convfuse_core::ScorePair::from_benign(benign).unwrap()
}
