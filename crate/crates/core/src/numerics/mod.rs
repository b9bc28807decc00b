//! Layer primitives with hand-written backward passes, the two-way softmax,
//! cross-entropy and the momentum SGD update.
//!
//! Convolution is cross-correlation (kernels are not flipped) over a
//! zero-padded input; output sizes use floor division.

mod conv;
mod fc;
mod loss;
mod pool;
mod relu;
mod sgd;

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::tensor::Tensor;

pub(crate) use conv::conv2d_backward_impl;
pub use conv::{conv2d_backward, conv2d_forward, conv_output_len};
pub use fc::{fc_backward, fc_forward};
pub use loss::{cross_entropy_loss, softmax2, LOG_CLAMP};
pub use pool::{maxpool_backward, maxpool_forward, maxpool_forward_padded, PoolIndices};
pub use relu::{relu_backward, relu_forward};
pub use sgd::{sgd_step, SgdConfig};

/// Gradients produced by one layer's backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub input_grad: Tensor,
    /// Keyed by parameter name (`weight`, `bias`); empty for layers without
    /// parameters.
    pub param_grads: BTreeMap<String, Tensor>,
}
