//! Layer primitives against finite differences and naive references.

mod common;

use common::*;
use convfuse_core::numerics::*;
use convfuse_core::{ClassLabel, Tensor};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn conv_matches_naive_loops() {
    let mut r = rng(11);
    let input = random_tensor(&mut r, &[3, 9, 9]);
    let kernels = random_tensor(&mut r, &[2, 3, 3, 3]);
    let bias = random_tensor(&mut r, &[2]);
    let fast = conv2d_forward(&input, &kernels, &bias, 2, 1).unwrap();
    let slow = naive_conv(&input, &kernels, &bias, 2, 1);
    assert_eq!(fast.shape(), [2, 5, 5]);
    assert!(fast.sub(&slow).unwrap().max_abs() <= 1e-12);
}

fn check_conv_grads(seed: u64, c: usize, h: usize, w: usize, k: usize, ks: usize, stride: usize, pad: usize) {
    let mut r = rng(seed);
    let input = random_tensor(&mut r, &[c, h, w]);
    let kernels = random_tensor(&mut r, &[k, c, ks, ks]);
    let bias = random_tensor(&mut r, &[k]);
    let out = conv2d_forward(&input, &kernels, &bias, stride, pad).unwrap();
    let proj = random_tensor(&mut r, out.shape());
    let g = conv2d_backward(&input, &kernels, stride, pad, &proj).unwrap();

    let num_x = finite_diff(&input, |x| {
        project(&conv2d_forward(x, &kernels, &bias, stride, pad).unwrap(), &proj)
    });
    let num_w = finite_diff(&kernels, |kk| {
        project(&conv2d_forward(&input, kk, &bias, stride, pad).unwrap(), &proj)
    });
    let num_b = finite_diff(&bias, |b| {
        project(&conv2d_forward(&input, &kernels, b, stride, pad).unwrap(), &proj)
    });
    assert!(max_rel_err(g.input_grad.data(), &num_x) <= GRAD_REL_TOL);
    assert!(max_rel_err(g.param_grads["weight"].data(), &num_w) <= GRAD_REL_TOL);
    assert!(max_rel_err(g.param_grads["bias"].data(), &num_b) <= GRAD_REL_TOL);
}

#[test]
fn conv_gradients_match_finite_differences() {
    check_conv_grads(1, 2, 6, 5, 3, 3, 1, 1);
    check_conv_grads(2, 3, 7, 7, 2, 3, 2, 0);
    check_conv_grads(3, 1, 5, 5, 2, 5, 1, 2);
    check_conv_grads(4, 2, 8, 8, 2, 2, 3, 1);
}

#[test]
fn pointwise_kernel_gradient_is_channel_correlation() {
    let mut r = rng(5);
    let input = random_tensor(&mut r, &[3, 4, 4]);
    let kernels = random_tensor(&mut r, &[2, 3, 1, 1]);
    let up = random_tensor(&mut r, &[2, 4, 4]);
    let g = conv2d_backward(&input, &kernels, 1, 0, &up).unwrap();
    for k in 0..2 {
        for c in 0..3 {
            let corr: f64 = (0..16).map(|p| input.data()[c * 16 + p] * up.data()[k * 16 + p]).sum();
            assert!((g.param_grads["weight"].data()[k * 3 + c] - corr).abs() < 1e-12);
        }
    }
    check_conv_grads(6, 3, 4, 4, 2, 1, 1, 0);
}

#[test]
fn fc_gradients_match_finite_differences() {
    let mut r = rng(7);
    let x = random_tensor(&mut r, &[6]);
    let w = random_tensor(&mut r, &[4, 6]);
    let b = random_tensor(&mut r, &[4]);
    let proj = random_tensor(&mut r, &[4]);
    let g = fc_backward(&x, &w, &proj).unwrap();
    let nx = finite_diff(&x, |x| project(&fc_forward(x, &w, &b).unwrap(), &proj));
    let nw = finite_diff(&w, |w| project(&fc_forward(&x, w, &b).unwrap(), &proj));
    let nb = finite_diff(&b, |b| project(&fc_forward(&x, &w, b).unwrap(), &proj));
    assert!(max_rel_err(g.input_grad.data(), &nx) <= GRAD_REL_TOL);
    assert!(max_rel_err(g.param_grads["weight"].data(), &nw) <= GRAD_REL_TOL);
    assert!(max_rel_err(g.param_grads["bias"].data(), &nb) <= GRAD_REL_TOL);
}

#[test]
fn relu_gradient_away_from_kink() {
    let mut r = rng(8);
    let x = Tensor::from_fn(&[40], |_| {
        let v: f64 = r.random_range(-1.0..1.0);
        if v.abs() < 1e-3 {
            0.5
        } else {
            v
        }
    });
    let proj = random_tensor(&mut r, &[40]);
    let g = relu_backward(&x, &proj).unwrap();
    let n = finite_diff(&x, |x| project(&relu_forward(x), &proj));
    assert!(max_rel_err(g.data(), &n) <= GRAD_REL_TOL);
}

#[test]
fn maxpool_matches_naive_windowed_max() {
    let mut r = rng(9);
    let x = random_tensor(&mut r, &[2, 6, 6]);
    let (y, _) = maxpool_forward(&x, 2, 2).unwrap();
    assert_eq!(y, naive_maxpool(&x, 2, 2));
    let (y, _) = maxpool_forward(&x, 3, 2).unwrap();
    assert_eq!(y, naive_maxpool(&x, 3, 2));
}

#[test]
fn maxpool_gradient_matches_finite_differences() {
    let mut r = rng(10);
    let x = random_tensor(&mut r, &[2, 7, 7]);
    let (y, idx) = maxpool_forward(&x, 3, 2).unwrap();
    let proj = random_tensor(&mut r, y.shape());
    let g = maxpool_backward(&idx, &proj).unwrap();
    let n = finite_diff(&x, |x| project(&maxpool_forward(x, 3, 2).unwrap().0, &proj));
    assert!(max_rel_err(g.data(), &n) <= GRAD_REL_TOL);
}

#[test]
fn softmax_cross_entropy_gradient() {
    let mut r = rng(12);
    for _ in 0..20 {
        let logits = Tensor::from_fn(&[2], |_| r.random_range(-5.0..5.0));
        for label in ClassLabel::ALL {
            let s = softmax2(&logits).unwrap();
            let (_, g) = cross_entropy_loss(&s, label);
            let n = finite_diff(&logits, |l| cross_entropy_loss(&softmax2(l).unwrap(), label).0);
            assert!(max_rel_err(g.data(), &n) <= GRAD_REL_TOL);
        }
    }
}

proptest! {
    #[test]
    fn conv_equals_naive_on_random_shapes(
        seed in any::<u64>(),
        c in 1usize..4, h in 1usize..9, w in 1usize..9,
        k in 1usize..4, ks in 1usize..5, stride in 1usize..4, pad in 0usize..3,
    ) {
        prop_assume!(ks <= h + 2 * pad && ks <= w + 2 * pad);
        let mut r = rng(seed);
        let input = random_tensor(&mut r, &[c, h, w]);
        let kernels = random_tensor(&mut r, &[k, c, ks, ks]);
        let bias = random_tensor(&mut r, &[k]);
        let fast = conv2d_forward(&input, &kernels, &bias, stride, pad).unwrap();
        let slow = naive_conv(&input, &kernels, &bias, stride, pad);
        prop_assert_eq!(fast.shape(), slow.shape());
        prop_assert!(fast.sub(&slow).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn maxpool_backward_conserves_mass(seed in any::<u64>(), c in 1usize..3, h in 2usize..8, k in 1usize..3, stride in 1usize..3) {
        prop_assume!(k <= h);
        let mut r = rng(seed);
        // integer-valued upstream keeps the sums exact
        let x = Tensor::from_fn(&[c, h, h], |_| r.random_range(-3i32..3) as f64);
        let (y, idx) = maxpool_forward(&x, k, stride).unwrap();
        let up = Tensor::from_fn(y.shape(), |_| r.random_range(-100i32..100) as f64);
        let g = maxpool_backward(&idx, &up).unwrap();
        prop_assert_eq!(g.sum(), up.sum());
    }

    #[test]
    fn softmax_sums_to_one_and_ignores_shifts(a in -500.0f64..500.0, b in -500.0f64..500.0, shift in -100.0f64..100.0) {
        let s = softmax2(&Tensor::new(&[2], vec![a, b]).unwrap()).unwrap();
        prop_assert!((s.benign() + s.porn() - 1.0).abs() <= 1e-9);
        prop_assert!(s.benign() >= 0.0 && s.porn() >= 0.0);
        let t = softmax2(&Tensor::new(&[2], vec![a + shift, b + shift]).unwrap()).unwrap();
        prop_assert!((s.benign() - t.benign()).abs() <= 1e-12);
        prop_assert!((s.porn() - t.porn()).abs() <= 1e-12);
    }

    #[test]
    fn layers_are_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let input = random_tensor(&mut r, &[2, 6, 6]);
        let kernels = random_tensor(&mut r, &[3, 2, 3, 3]);
        let bias = random_tensor(&mut r, &[3]);
        let a = conv2d_forward(&input, &kernels, &bias, 1, 1).unwrap();
        let b = conv2d_forward(&input, &kernels, &bias, 1, 1).unwrap();
        prop_assert!(a.bitwise_eq(&b));
    }
}
