//! Network architectures, jets and parameter gradients.

mod activation;
pub mod checkpoint;
pub mod gradcheck;
mod jet;
mod network;
mod spec;

pub use activation::{ActivationKind, Derivatives};
pub use jet::{FnField, Jet2, JetBatch, JetField, JetOrder, JetSeed, PointJet, PointLoss};
pub use network::{init_params, Network, ParameterVector};
pub use spec::{Architecture, LayerLayout, NetworkSpec, ParamLayout, ParamSlot};
