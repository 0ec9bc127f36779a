//! Differentiable dense networks.
//!
//! [`MlpParams`] evaluates a `tanh` network on single points, optionally with
//! [`Jet2`] input derivatives. [`Tape`] records batched evaluations so that a
//! scalar loss built from values and input derivatives can be differentiated
//! with respect to the network parameters in one reverse sweep.

mod grad;
mod jet;
mod mlp;
mod tape;

pub use grad::ParamGradient;
pub use jet::Jet2;
pub use mlp::{layer_sizes, MlpParams, DEFAULT_HIDDEN_LAYERS, DEFAULT_WIDTH};
pub use tape::{jet_slots, seed_jets, slot_d1, slot_d2, GradStatus, Gradients, NetId, Tape, Var};
