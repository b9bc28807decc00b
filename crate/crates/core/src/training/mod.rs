//! Mini-batch momentum SGD in two regimes: full training of every layer,
//! and fine-tuning where only the final classifier layer adapts.

mod dataset;
mod executor;

use alloc::vec::Vec;
use core::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::{
    backward, cached_loss, count_trainable_parameters, extract_features, forward, ModelGrads, ModelParams, NetworkSpec,
};
use crate::numerics::{sgd_step, SgdConfig};
use crate::score::ClassLabel;
use crate::tensor::Tensor;

pub use dataset::{Dataset, WindowDataset};
pub use executor::{Executor, Sequential};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    /// Every layer adapts.
    Full,
    /// Only the final FullyConnected layer adapts.
    FineTune,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub seed: u64,
    pub mode: TrainMode,
}

impl TrainConfig {
    /// 20 epochs, batch 32, momentum 0.9, weight decay 5e-4; learning rate
    /// 0.01 for full training and 0.05 for fine-tuning.
    pub fn defaults(mode: TrainMode) -> Self {
        Self {
            epochs: 20,
            batch_size: 32,
            learning_rate: match mode {
                TrainMode::Full => 0.01,
                TrainMode::FineTune => 0.05,
            },
            momentum: 0.9,
            weight_decay: 5e-4,
            seed: 0,
            mode,
        }
    }

    pub fn sgd(&self) -> SgdConfig {
        SgdConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch size must be at least 1"));
        }
        self.sgd().validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean per-sample loss of each epoch, measured before each update.
    pub epoch_losses: Vec<f64>,
    pub trainable_parameters: u64,
    /// Left at zero here; callers with a clock fill it in.
    pub wall_time: Duration,
}

fn check_mode(spec: &NetworkSpec, mode: TrainMode) -> Result<()> {
    let last = spec.final_fc_index();
    let ok = spec
        .layers()
        .iter()
        .enumerate()
        .filter(|(_, l)| l.kind.param_count() > 0)
        .all(|(i, l)| match mode {
            TrainMode::Full => l.trainable,
            TrainMode::FineTune => l.trainable == (Some(i) == last),
        });
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!(
            "spec {} trainable flags do not match {mode:?} training",
            spec.name()
        )))
    }
}

/// Trains `init` on `data`, returning the final parameters.
///
/// Batches follow a fresh seeded shuffle each epoch; per-sample gradients
/// are summed in batch order, so results do not depend on the executor.
pub fn train<D, E>(
    spec: &NetworkSpec,
    init: &ModelParams,
    data: &D,
    config: &TrainConfig,
    exec: &E,
) -> Result<(ModelParams, TrainReport)>
where
    D: Dataset + ?Sized,
    E: Executor,
{
    config.validate()?;
    check_mode(spec, config.mode)?;
    init.check_against(spec)?;
    let n = data.len();
    if n == 0 {
        return Err(Error::Empty("training set"));
    }
    let sgd = config.sgd();
    let mut params = init.clone();
    let mut velocity = ModelGrads::default();
    for (i, layer) in spec.layers().iter().enumerate() {
        if layer.trainable && layer.kind.param_count() > 0 {
            let zeros = params
                .layer(i)
                .iter()
                .map(|(k, t)| (k.clone(), Tensor::zeros(t.shape())))
                .collect();
            velocity.layers.insert(i, zeros);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let current = &params;
            let per_sample = exec.map(batch.len(), |j| {
                let (x, label) = data.sample(batch[j])?;
                let (_, cache) = forward(spec, current, &x)?;
                let loss = cached_loss(&cache, label);
                Ok((loss, backward(spec, current, &cache, label)?))
            });
            let per_sample = per_sample.map_err(|e| match e {
                Error::NonFinite(msg) => Error::NonFinite(alloc::format!("epoch {epoch}, batch {b}: {msg}")),
                other => other,
            })?;
            let mut grads = ModelGrads::default();
            let mut batch_loss = 0.0;
            for (loss, g) in &per_sample {
                batch_loss += loss;
                grads.add_assign(g)?;
            }
            if !batch_loss.is_finite() || !grads.is_finite() {
                return Err(Error::NonFinite(alloc::format!(
                    "epoch {epoch}, batch {b}: loss {batch_loss}"
                )));
            }
            loss_sum += batch_loss;
            grads.scale(1.0 / batch.len() as f64);
            for (&i, map) in &grads.layers {
                let vel = velocity.layers.get_mut(&i).expect("velocity for trainable layer");
                let layer = params.layer_mut(i);
                for (name, g) in map {
                    let w = layer.get_mut(name).expect("parameter exists");
                    sgd_step(w, g, vel.get_mut(name).expect("velocity exists"), &sgd)?;
                }
            }
        }
        epoch_losses.push(loss_sum / n as f64);
    }
    Ok((
        params,
        TrainReport {
            epoch_losses,
            trainable_parameters: count_trainable_parameters(spec),
            wall_time: Duration::ZERO,
        },
    ))
}

/// Runs the frozen trunk once per sample and keeps the output of
/// `feature_layer` with the sample's label.
pub fn featurize_dataset<D, E>(
    spec: &NetworkSpec,
    params: &ModelParams,
    data: &D,
    feature_layer: usize,
    exec: &E,
) -> Result<Vec<(Tensor, ClassLabel)>>
where
    D: Dataset + ?Sized,
    E: Executor,
{
    if feature_layer >= spec.layers().len() {
        return Err(Error::invalid(alloc::format!(
            "feature layer {feature_layer} out of range"
        )));
    }
    exec.map(data.len(), |i| {
        let (x, label) = data.sample(i)?;
        Ok((extract_features(spec, params, &x, feature_layer)?, label))
    })
}

/// Fine-tunes the final classifier on cached trunk features.
///
/// Equivalent to [`train`] in [`TrainMode::FineTune`] over the samples
/// the features came from, since the trunk never changes.
pub fn train_classifier_head<E: Executor>(
    spec: &NetworkSpec,
    init: &ModelParams,
    features: &[(Tensor, ClassLabel)],
    config: &TrainConfig,
    exec: &E,
) -> Result<(ModelParams, TrainReport)> {
    if config.mode != TrainMode::FineTune {
        return Err(Error::invalid("cached features only support fine-tuning"));
    }
    check_mode(spec, TrainMode::FineTune)?;
    init.check_against(spec)?;
    let last = spec.final_fc_index().expect("checked by mode");
    let head = spec.classifier_head()?;
    let head_init = ModelParams::from_layers(init.seed(), alloc::vec![init.layer(last).clone(), Default::default()]);
    let (trained, report) = train(&head, &head_init, features, config, exec)?;
    let mut params = init.clone();
    *params.layer_mut(last) = trained.layer(0).clone();
    Ok((params, report))
}
