use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::spec::NetworkSpec;
use crate::container::Container;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Parameter tensors of one layer, keyed by name.
pub type ParamMap = BTreeMap<String, Tensor>;

/// Learned parameters of a network, one map per layer (empty for layers
/// without parameters).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    seed: u64,
    layers: Vec<ParamMap>,
}

impl ModelParams {
    /// He initialization: weights drawn from N(0, 2/fan_in), zero biases.
    pub fn init(spec: &NetworkSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = spec
            .layers()
            .iter()
            .map(|layer| {
                layer
                    .kind
                    .param_shapes()
                    .into_iter()
                    .map(|(name, shape)| {
                        let t = if name.ends_with("weight") {
                            let fan_in: usize = shape[1..].iter().product();
                            let std = libm::sqrt(2.0 / fan_in as f64);
                            let normal = Normal::new(0.0, std).expect("positive std");
                            Tensor::from_fn(&shape, |_| normal.sample(&mut rng))
                        } else {
                            Tensor::zeros(&shape)
                        };
                        (name, t)
                    })
                    .collect()
            })
            .collect();
        Self { seed, layers }
    }

    pub fn zeros(spec: &NetworkSpec) -> Self {
        let layers = spec
            .layers()
            .iter()
            .map(|layer| {
                layer
                    .kind
                    .param_shapes()
                    .into_iter()
                    .map(|(name, shape)| (name, Tensor::zeros(&shape)))
                    .collect()
            })
            .collect();
        Self { seed: 0, layers }
    }

    /// Assembles parameters from per-layer maps; shapes are not checked
    /// until [`ModelParams::check_against`].
    pub fn from_layers(seed: u64, layers: Vec<ParamMap>) -> Self {
        Self { seed, layers }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layer(&self, index: usize) -> &ParamMap {
        &self.layers[index]
    }

    pub fn layer_mut(&mut self, index: usize) -> &mut ParamMap {
        &mut self.layers[index]
    }

    pub fn layers(&self) -> &[ParamMap] {
        &self.layers
    }

    pub fn total_len(&self) -> usize {
        self.layers.iter().flat_map(|m| m.values()).map(Tensor::numel).sum()
    }

    /// Checks that every tensor matches the shapes `spec` declares.
    pub fn check_against(&self, spec: &NetworkSpec) -> Result<()> {
        if self.layers.len() != spec.layers().len() {
            return Err(Error::invalid(alloc::format!(
                "parameters cover {} layers, spec {} has {}",
                self.layers.len(),
                spec.name(),
                spec.layers().len()
            )));
        }
        for (index, (layer, map)) in spec.layers().iter().zip(&self.layers).enumerate() {
            let expected = layer.kind.param_shapes();
            let matches = expected.len() == map.len()
                && expected
                    .iter()
                    .all(|(name, shape)| map.get(name).is_some_and(|t| t.shape() == shape.as_slice()));
            if !matches {
                return Err(Error::Layer {
                    index,
                    kind: layer.kind.name(),
                    reason: "parameter shapes do not match the spec".into(),
                });
            }
        }
        Ok(())
    }

    /// Entries are named `<layer index>.<param name>`.
    pub fn to_container(&self, spec: &NetworkSpec) -> Container {
        let entries = self
            .layers
            .iter()
            .enumerate()
            .flat_map(|(i, m)| m.iter().map(move |(name, t)| (alloc::format!("{i}.{name}"), t.clone())))
            .collect();
        Container {
            spec_name: spec.name().into(),
            seed: self.seed,
            entries,
        }
    }

    pub fn from_container(spec: &NetworkSpec, container: &Container) -> Result<Self> {
        if container.spec_name != spec.name() {
            return Err(Error::invalid(alloc::format!(
                "container holds {:?}, expected {:?}",
                container.spec_name,
                spec.name()
            )));
        }
        let mut layers: Vec<ParamMap> = alloc::vec![BTreeMap::new(); spec.layers().len()];
        for (key, tensor) in &container.entries {
            let (index, name) = key
                .split_once('.')
                .and_then(|(i, n)| Some((i.parse::<usize>().ok()?, n)))
                .ok_or_else(|| Error::invalid(alloc::format!("bad parameter entry name {key:?}")))?;
            let slot = layers
                .get_mut(index)
                .ok_or_else(|| Error::invalid(alloc::format!("entry {key:?} beyond the last layer")))?;
            slot.insert(name.into(), tensor.clone());
        }
        let params = Self {
            seed: container.seed,
            layers,
        };
        params.check_against(spec)?;
        Ok(params)
    }
}

/// Parameter gradients for trainable layers only, keyed by layer index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelGrads {
    pub layers: BTreeMap<usize, ParamMap>,
}

impl ModelGrads {
    pub fn get(&self, layer: usize, name: &str) -> Option<&Tensor> {
        self.layers.get(&layer).and_then(|m| m.get(name))
    }

    pub fn add_assign(&mut self, other: &ModelGrads) -> Result<()> {
        for (&i, map) in &other.layers {
            let dst = self.layers.entry(i).or_default();
            for (name, g) in map {
                match dst.get_mut(name) {
                    Some(t) => t.add_assign(g)?,
                    None => {
                        dst.insert(name.clone(), g.clone());
                    }
                }
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.layers.values_mut().flat_map(|m| m.values_mut()) {
            t.scale(factor);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers.values().flat_map(|m| m.values()).all(Tensor::is_finite)
    }
}
