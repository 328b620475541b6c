//! Quantized fully connected and 1-D convolutional networks with sign output.

mod arch;
mod forward;
mod grid;
mod params;

pub use arch::{Activation, ArchKind, Architecture, ConvArch, ConvFlavor, FcArch, FcFlavor};
pub use forward::{
    forward_cnn, forward_fc, forward_scn, forward_sfc, sign_label, Evaluator, FnPredictor, Model, Network, Output,
    Predictor,
};
pub use grid::QuantGrid;
pub use params::{ConvHead, ConvLayer, DenseLayer, LayerSlots, Layout, QuantParams};

/// `param_count` for any architecture.
pub fn param_count(arch: &Architecture) -> usize {
    arch.param_count()
}
