use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::arch::{Architecture, ConvArch, ConvFlavor, FcArch, FcFlavor};
use super::grid::QuantGrid;
use crate::{Error, Result};

/// Offsets of one layer's blocks inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSlots {
    pub weights: usize,
    pub bias: usize,
    pub scale: Option<usize>,
    /// Output units (rows / output channels).
    pub outputs: usize,
    /// Input units (columns / input channels).
    pub inputs: usize,
    /// Kernel size, 1 for dense layers.
    pub kernel: usize,
}

/// Canonical flattening shared by evaluation, embedding and enumeration.
///
/// Layer by layer: weights (row-major, or `[out][in][tap]` for kernels),
/// bias, then scale if present. Conv nets append head weights (channel-major)
/// and the head bias.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub layers: Vec<LayerSlots>,
    /// Offset of the head weights for conv nets; the head bias follows them.
    pub head: Option<usize>,
    pub len: usize,
}

impl Layout {
    pub fn of(arch: &Architecture) -> Self {
        match arch {
            Architecture::Fc(a) => Self::fc(a),
            Architecture::Conv(a) => Self::conv(a),
        }
    }

    pub fn fc(arch: &FcArch) -> Self {
        let w = arch.widths();
        let mut at = 0;
        let mut layers = Vec::with_capacity(arch.depth());
        for l in 1..=arch.depth() {
            let weights = at;
            at += w[l] * w[l - 1];
            let bias = at;
            at += w[l];
            let scale = arch.has_scale(l).then(|| {
                at += w[l];
                at - w[l]
            });
            layers.push(LayerSlots { weights, bias, scale, outputs: w[l], inputs: w[l - 1], kernel: 1 });
        }
        Self { layers, head: None, len: at }
    }

    pub fn conv(arch: &ConvArch) -> Self {
        let c = arch.channels();
        let k = arch.kernels();
        let mut at = 0;
        let mut layers = Vec::with_capacity(arch.depth());
        for l in 1..=arch.depth() {
            let weights = at;
            at += c[l] * c[l - 1] * k[l - 1];
            let bias = at;
            at += c[l];
            let scale = (arch.flavor() == ConvFlavor::Scaled).then(|| {
                at += c[l];
                at - c[l]
            });
            layers.push(LayerSlots { weights, bias, scale, outputs: c[l], inputs: c[l - 1], kernel: k[l - 1] });
        }
        let head = at;
        at += arch.head_width() + 1;
        Self { layers, head: Some(head), len: at }
    }
}

/// One dense layer in structured form. `weights` is row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Vec<f64>>,
}

impl DenseLayer {
    pub fn zeros(outputs: usize, inputs: usize, scaled: bool) -> Self {
        Self {
            weights: vec![0.0; outputs * inputs],
            bias: vec![0.0; outputs],
            scale: scaled.then(|| vec![0.0; outputs]),
        }
    }
}

/// One conv layer; `kernels` is laid out `[out][in][tap]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvLayer {
    pub kernels: Vec<f64>,
    pub bias: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Vec<f64>>,
}

/// Linear read-out of a conv net; `weights[ch * s_L + pos]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvHead {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// A full parameter assignment in canonical flat order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuantParams {
    values: Vec<f64>,
}

impl QuantParams {
    pub fn from_values(arch: &Architecture, values: Vec<f64>) -> Result<Self> {
        let m = arch.param_count();
        if values.len() != m {
            return Err(Error::Shape { what: "flat parameter vector", layer: 0, expected: m, actual: values.len() });
        }
        Ok(Self { values })
    }

    pub fn zeros(arch: &Architecture) -> Self {
        Self { values: vec![0.0; arch.param_count()] }
    }

    /// Maps grid indices to levels.
    pub fn from_indices(grid: &QuantGrid, idx: &[usize]) -> Self {
        Self { values: idx.iter().map(|&i| grid.level(i)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Number of nonzero entries.
    pub fn support(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn check_grid(&self, grid: &QuantGrid) -> Result<()> {
        match self.values.iter().position(|&v| !grid.contains(v)) {
            Some(index) => Err(Error::OffGrid { index, value: self.values[index] }),
            None => Ok(()),
        }
    }

    /// Grid index of every entry; fails on off-grid values.
    pub fn grid_indices(&self, grid: &QuantGrid) -> Result<Vec<usize>> {
        self.values
            .iter()
            .enumerate()
            .map(|(index, &value)| grid.index_of(value).ok_or(Error::OffGrid { index, value }))
            .collect()
    }

    pub fn check_arch(&self, arch: &Architecture) -> Result<()> {
        let m = arch.param_count();
        if self.values.len() != m {
            return Err(Error::Shape {
                what: "flat parameter vector",
                layer: 0,
                expected: m,
                actual: self.values.len(),
            });
        }
        Ok(())
    }

    pub fn from_fc_layers(arch: &FcArch, layers: &[DenseLayer]) -> Result<Self> {
        if layers.len() != arch.depth() {
            return Err(Error::Shape { what: "layer count", layer: 0, expected: arch.depth(), actual: layers.len() });
        }
        let w = arch.widths();
        let mut values = Vec::with_capacity(arch.param_count());
        for (i, layer) in layers.iter().enumerate() {
            let l = i + 1;
            check_len("weights", l, w[l] * w[l - 1], layer.weights.len())?;
            check_len("bias", l, w[l], layer.bias.len())?;
            values.extend_from_slice(&layer.weights);
            values.extend_from_slice(&layer.bias);
            match (&layer.scale, arch.has_scale(l)) {
                (Some(g), true) => {
                    check_len("scale", l, w[l], g.len())?;
                    values.extend_from_slice(g);
                }
                (None, true) => return Err(Error::MissingScales { layer: l }),
                (Some(g), false) => return Err(unexpected_scale(l, g.len())),
                (None, false) => {}
            }
        }
        Ok(Self { values })
    }

    pub fn fc_layers(&self, arch: &FcArch) -> Result<Vec<DenseLayer>> {
        self.check_arch(&Architecture::Fc(arch.clone()))?;
        let layout = Layout::fc(arch);
        Ok(layout
            .layers
            .iter()
            .map(|s| DenseLayer {
                weights: self.values[s.weights..s.weights + s.outputs * s.inputs].to_vec(),
                bias: self.values[s.bias..s.bias + s.outputs].to_vec(),
                scale: s.scale.map(|g| self.values[g..g + s.outputs].to_vec()),
            })
            .collect())
    }

    pub fn from_conv_layers(arch: &ConvArch, layers: &[ConvLayer], head: &ConvHead) -> Result<Self> {
        if layers.len() != arch.depth() {
            return Err(Error::Shape { what: "layer count", layer: 0, expected: arch.depth(), actual: layers.len() });
        }
        let c = arch.channels();
        let k = arch.kernels();
        let scaled = arch.flavor() == ConvFlavor::Scaled;
        let mut values = Vec::with_capacity(arch.param_count());
        for (i, layer) in layers.iter().enumerate() {
            let l = i + 1;
            check_len("kernels", l, c[l] * c[l - 1] * k[i], layer.kernels.len())?;
            check_len("bias", l, c[l], layer.bias.len())?;
            values.extend_from_slice(&layer.kernels);
            values.extend_from_slice(&layer.bias);
            match (&layer.scale, scaled) {
                (Some(g), true) => {
                    check_len("scale", l, c[l], g.len())?;
                    values.extend_from_slice(g);
                }
                (None, true) => return Err(Error::MissingScales { layer: l }),
                (Some(g), false) => return Err(unexpected_scale(l, g.len())),
                (None, false) => {}
            }
        }
        check_len("head weights", arch.depth() + 1, arch.head_width(), head.weights.len())?;
        values.extend_from_slice(&head.weights);
        values.push(head.bias);
        Ok(Self { values })
    }

    pub fn conv_layers(&self, arch: &ConvArch) -> Result<(Vec<ConvLayer>, ConvHead)> {
        self.check_arch(&Architecture::Conv(arch.clone()))?;
        let layout = Layout::conv(arch);
        let layers = layout
            .layers
            .iter()
            .map(|s| ConvLayer {
                kernels: self.values[s.weights..s.weights + s.outputs * s.inputs * s.kernel].to_vec(),
                bias: self.values[s.bias..s.bias + s.outputs].to_vec(),
                scale: s.scale.map(|g| self.values[g..g + s.outputs].to_vec()),
            })
            .collect();
        let h = layout.head.unwrap();
        let d = arch.head_width();
        let head = ConvHead { weights: self.values[h..h + d].to_vec(), bias: self.values[h + d] };
        Ok((layers, head))
    }
}

fn check_len(what: &'static str, layer: usize, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Shape { what, layer, expected, actual })
    }
}

fn unexpected_scale(layer: usize, actual: usize) -> Error {
    Error::Shape { what: "scale (layer has none)", layer, expected: 0, actual }
}

impl FcFlavor {
    pub fn name(&self) -> &'static str {
        match self {
            FcFlavor::Vanilla => "vanilla",
            FcFlavor::Scaled => "scaled",
        }
    }
}

impl ConvFlavor {
    pub fn name(&self) -> &'static str {
        match self {
            ConvFlavor::Plain => "plain",
            ConvFlavor::Scaled => "scaled",
        }
    }
}
