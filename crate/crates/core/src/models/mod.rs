//! Declarative network descriptions, parameter sets and whole-network
//! execution.

mod builders;
mod inception;
mod network;
mod params;
mod spec;

pub use builders::{build_anet_full_spec, build_anet_mini, build_gnet_mini, build_named, MINI_INPUT_SHAPE};
pub use inception::InceptionSpec;
pub use network::{backward, cached_loss, extract_features, forward, predict, ForwardCache};
pub use params::{ModelGrads, ModelParams, ParamMap};
pub use spec::{count_parameters, count_trainable_parameters, LayerKind, LayerSpec, NetworkSpec};
