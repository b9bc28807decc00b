use alloc::string::String;
use alloc::vec::Vec;

use super::inception::{self, InceptionCache};
use super::params::{ModelGrads, ModelParams, ParamMap};
use super::spec::{LayerKind, NetworkSpec};
use crate::error::{Error, Result};
use crate::numerics::{
    conv2d_backward_impl, conv2d_forward, cross_entropy_loss, fc_backward, fc_forward, maxpool_backward,
    maxpool_forward, relu_backward, relu_forward, softmax2, PoolIndices,
};
use crate::score::{ClassLabel, ScorePair};
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
enum Aux {
    None,
    Pool(PoolIndices),
    Inception(InceptionCache),
}

/// Per-layer activations recorded by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    spec_name: String,
    /// `activations[0]` is the scaled input; `activations[i + 1]` is the
    /// output of layer `i`.
    activations: Vec<Tensor>,
    aux: Vec<Aux>,
}

impl ForwardCache {
    pub fn activation(&self, layer: usize) -> Option<&Tensor> {
        self.activations.get(layer + 1)
    }
}

fn param<'a>(p: &'a ParamMap, name: &str, index: usize, kind: &LayerKind) -> Result<&'a Tensor> {
    p.get(name).ok_or_else(|| Error::Layer {
        index,
        kind: kind.name(),
        reason: alloc::format!("missing parameter {name:?}"),
    })
}

/// Attaches the layer position to an error; non-finite failures keep their
/// kind.
fn at_layer<T>(index: usize, kind: &LayerKind, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::NonFinite(msg) => Error::NonFinite(alloc::format!("layer {index} ({}): {msg}", kind.name())),
        e => Error::Layer {
            index,
            kind: kind.name(),
            reason: alloc::format!("{e}"),
        },
    })
}

fn run_layer(index: usize, kind: &LayerKind, p: &ParamMap, x: &Tensor) -> Result<(Tensor, Aux)> {
    let out = match *kind {
        LayerKind::Conv { stride, pad, .. } => {
            let w = param(p, "weight", index, kind)?;
            let b = param(p, "bias", index, kind)?;
            (conv2d_forward(x, w, b, stride, pad)?, Aux::None)
        }
        LayerKind::ReLU => (relu_forward(x), Aux::None),
        LayerKind::MaxPool { kernel, stride } => {
            let (y, idx) = maxpool_forward(x, kernel, stride)?;
            (y, Aux::Pool(idx))
        }
        LayerKind::FullyConnected { .. } => {
            let w = param(p, "weight", index, kind)?;
            let b = param(p, "bias", index, kind)?;
            (fc_forward(x, w, b)?, Aux::None)
        }
        LayerKind::Flatten => (x.clone().reshape(&[x.numel()])?, Aux::None),
        LayerKind::Inception(ref block) => {
            let (y, cache) = inception::forward(block, p, x)?;
            (y, Aux::Inception(cache))
        }
        LayerKind::Softmax2 => {
            let s = softmax2(x)?;
            (Tensor::new(&[2], alloc::vec![s.benign(), s.porn()])?, Aux::None)
        }
    };
    Ok(out)
}

fn check_input(spec: &NetworkSpec, params: &ModelParams, input: &Tensor) -> Result<Tensor> {
    if input.shape() != spec.input_shape() {
        return Err(Error::shape("network input", input.shape(), spec.input_shape()));
    }
    if params.layers().len() != spec.layers().len() {
        return Err(Error::invalid(alloc::format!(
            "parameters cover {} layers, spec {} has {}",
            params.layers().len(),
            spec.name(),
            spec.layers().len()
        )));
    }
    let scale = spec.input_scale();
    Ok(if scale == 1.0 {
        input.clone()
    } else {
        input.map(|v| v * scale)
    })
}

/// Runs every layer; returns the scores and the activation cache.
pub fn forward(spec: &NetworkSpec, params: &ModelParams, input: &Tensor) -> Result<(ScorePair, ForwardCache)> {
    let x = check_input(spec, params, input)?;
    let n = spec.layers().len();
    let mut activations = Vec::with_capacity(n + 1);
    let mut aux = Vec::with_capacity(n);
    activations.push(x);
    for (i, layer) in spec.layers().iter().enumerate() {
        let (y, a) = at_layer(
            i,
            &layer.kind,
            run_layer(i, &layer.kind, params.layer(i), &activations[i]),
        )?;
        activations.push(y);
        aux.push(a);
    }
    let out = activations.last().expect("nonempty").data();
    let scores = ScorePair::new_unchecked(out[0], out[1]);
    Ok((
        scores,
        ForwardCache {
            spec_name: spec.name().into(),
            activations,
            aux,
        },
    ))
}

/// Forward pass keeping only the running activation.
pub fn predict(spec: &NetworkSpec, params: &ModelParams, input: &Tensor) -> Result<ScorePair> {
    let out = run_until(spec, params, input, spec.layers().len() - 1)?;
    Ok(ScorePair::new_unchecked(out.data()[0], out.data()[1]))
}

/// Output of layer `layer_index`.
pub fn extract_features(
    spec: &NetworkSpec,
    params: &ModelParams,
    input: &Tensor,
    layer_index: usize,
) -> Result<Tensor> {
    if layer_index >= spec.layers().len() {
        return Err(Error::invalid(alloc::format!(
            "layer index {layer_index} out of range for {} layers",
            spec.layers().len()
        )));
    }
    run_until(spec, params, input, layer_index)
}

fn run_until(spec: &NetworkSpec, params: &ModelParams, input: &Tensor, last: usize) -> Result<Tensor> {
    let mut x = check_input(spec, params, input)?;
    for (i, layer) in spec.layers()[..=last].iter().enumerate() {
        x = at_layer(i, &layer.kind, run_layer(i, &layer.kind, params.layer(i), &x))?.0;
    }
    Ok(x)
}

/// Cross-entropy loss of a cached forward pass against `label`.
pub fn cached_loss(cache: &ForwardCache, label: ClassLabel) -> f64 {
    let out = cache.activations.last().expect("nonempty").data();
    cross_entropy_loss(&ScorePair::new_unchecked(out[0], out[1]), label).0
}

/// Backpropagates the cross-entropy loss for `label`. Only layers flagged
/// trainable report parameter gradients; propagation stops at the lowest
/// trainable layer since nothing below it needs a gradient.
pub fn backward(
    spec: &NetworkSpec,
    params: &ModelParams,
    cache: &ForwardCache,
    label: ClassLabel,
) -> Result<ModelGrads> {
    let n = spec.layers().len();
    let consistent = cache.spec_name == spec.name()
        && cache.activations.len() == n + 1
        && cache.aux.len() == n
        && (0..n).all(|i| spec.output_shape(i) == Some(cache.activations[i + 1].shape()));
    if !consistent {
        return Err(Error::invalid(alloc::format!(
            "forward cache from {:?} does not match spec {:?}",
            cache.spec_name,
            spec.name()
        )));
    }
    let mut grads = ModelGrads::default();
    let Some(stop) = spec.first_trainable() else {
        return Ok(grads);
    };
    let out = cache.activations[n].data();
    let (_, mut upstream) = cross_entropy_loss(&ScorePair::new_unchecked(out[0], out[1]), label);

    for i in (stop..n - 1).rev() {
        let layer = &spec.layers()[i];
        let kind = &layer.kind;
        let x = &cache.activations[i];
        let p = params.layer(i);
        let want_input = i > stop;
        let (gx, pg) = match (kind, &cache.aux[i]) {
            (LayerKind::Conv { stride, pad, .. }, _) => {
                let w = param(p, "weight", i, kind)?;
                let (gx, pg) = at_layer(
                    i,
                    kind,
                    conv2d_backward_impl(x, w, *stride, *pad, &upstream, want_input),
                )?;
                (gx, Some(pg))
            }
            (LayerKind::ReLU, _) => (Some(relu_backward(x, &upstream)?), None),
            (LayerKind::MaxPool { .. }, Aux::Pool(idx)) => (Some(maxpool_backward(idx, &upstream)?), None),
            (LayerKind::FullyConnected { .. }, _) => {
                let w = param(p, "weight", i, kind)?;
                let g = at_layer(i, kind, fc_backward(x, w, &upstream))?;
                (Some(g.input_grad), Some(g.param_grads))
            }
            (LayerKind::Flatten, _) => (Some(upstream.clone().reshape(x.shape())?), None),
            (LayerKind::Inception(block), Aux::Inception(ic)) => at_layer(
                i,
                kind,
                inception::backward(block, p, x, ic, &upstream, layer.trainable, want_input),
            )?,
            _ => {
                return Err(Error::Layer {
                    index: i,
                    kind: kind.name(),
                    reason: "forward cache entry has the wrong kind".into(),
                })
            }
        };
        if layer.trainable {
            if let Some(pg) = pg {
                if !pg.is_empty() {
                    grads.layers.insert(i, pg);
                }
            }
        }
        if !want_input {
            break;
        }
        upstream = gx.expect("input gradient requested");
    }
    Ok(grads)
}
