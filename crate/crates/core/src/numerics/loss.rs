use crate::error::{Error, Result};
use crate::score::{ClassLabel, ScorePair};
use crate::tensor::Tensor;

/// Lower clamp applied to the true-class score before taking its log.
pub const LOG_CLAMP: f64 = 1e-12;

/// Two-way softmax with max subtraction.
pub fn softmax2(logits: &Tensor) -> Result<ScorePair> {
    let [a, b] = match logits.data() {
        &[a, b] if logits.shape() == [2] => [a, b],
        _ => return Err(Error::shape("softmax2", logits.shape(), &[2])),
    };
    if a.is_nan() || b.is_nan() {
        return Err(Error::NonFinite(alloc::format!("softmax2 logits ({a}, {b})")));
    }
    let m = a.max(b);
    let ea = libm::exp(a - m);
    let eb = libm::exp(b - m);
    let z = ea + eb;
    let benign = ea / z;
    Ok(ScorePair::new_unchecked(benign, 1.0 - benign))
}

/// Returns `-ln(score of label)` and its gradient with respect to the
/// logits that produced `scores`, `scores - one_hot(label)`.
pub fn cross_entropy_loss(scores: &ScorePair, label: ClassLabel) -> (f64, Tensor) {
    let p = scores.get(label).max(LOG_CLAMP);
    let mut grad = [scores.benign(), scores.porn()];
    grad[label.index()] -= 1.0;
    let grad = Tensor::new(&[2], grad.to_vec()).expect("two elements");
    (-libm::log(p), grad)
}
