use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid(alloc::format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) || self.weight_decay < 0.0 {
            return Err(Error::invalid(
                "momentum must lie in [0,1) and weight decay be nonnegative",
            ));
        }
        Ok(())
    }
}

/// `v <- momentum*v - lr*(g + decay*w); w <- w + v`.
pub fn sgd_step(param: &mut Tensor, grad: &Tensor, velocity: &mut Tensor, cfg: &SgdConfig) -> Result<()> {
    cfg.validate()?;
    if param.shape() != grad.shape() || param.shape() != velocity.shape() {
        return Err(Error::shape("sgd_step", param.shape(), grad.shape()));
    }
    for ((w, &g), v) in param.data_mut().iter_mut().zip(grad.data()).zip(velocity.data_mut()) {
        *v = cfg.momentum * *v - cfg.learning_rate * (g + cfg.weight_decay * *w);
        *w += *v;
    }
    Ok(())
}
