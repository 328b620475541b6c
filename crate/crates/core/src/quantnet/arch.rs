use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hidden-layer nonlinearity. Every variant maps 0 to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "slope", rename_all = "kebab-case")]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
}

impl Activation {
    pub fn leaky(slope: f64) -> Result<Self> {
        let act = Activation::LeakyRelu(slope);
        act.validate()?;
        Ok(act)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Activation::Relu => Ok(()),
            Activation::LeakyRelu(r) if r.is_finite() && r != 0.0 && r != 1.0 => Ok(()),
            Activation::LeakyRelu(r) => Err(Error::InvalidActivation(r)),
        }
    }

    #[inline(always)]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu(r) => {
                if x > 0.0 {
                    x
                } else {
                    r * x
                }
            }
        }
    }

    /// Negative-side slope (0 for ReLU).
    pub fn slope(&self) -> f64 {
        match *self {
            Activation::Relu => 0.0,
            Activation::LeakyRelu(r) => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FcFlavor {
    Vanilla,
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvFlavor {
    Plain,
    Scaled,
}

/// Fully connected architecture with widths `d_0..d_L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFc")]
pub struct FcArch {
    widths: Vec<usize>,
    flavor: FcFlavor,
}

#[derive(Deserialize)]
struct RawFc {
    widths: Vec<usize>,
    flavor: FcFlavor,
}

impl TryFrom<RawFc> for FcArch {
    type Error = Error;
    fn try_from(raw: RawFc) -> Result<Self> {
        FcArch::new(raw.widths, raw.flavor)
    }
}

impl FcArch {
    pub fn new(widths: Vec<usize>, flavor: FcFlavor) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidArch(format!(
                "need at least input and output widths, got {} entries",
                widths.len()
            )));
        }
        if let Some(l) = widths.iter().position(|&d| d == 0) {
            return Err(Error::InvalidArch(format!("width d_{l} is zero")));
        }
        Ok(Self { widths, flavor })
    }

    pub fn vanilla(widths: &[usize]) -> Result<Self> {
        Self::new(widths.to_vec(), FcFlavor::Vanilla)
    }

    pub fn scaled(widths: &[usize]) -> Result<Self> {
        Self::new(widths.to_vec(), FcFlavor::Scaled)
    }

    /// Number of weight layers `L`.
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    /// `d_0..d_L`.
    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        self.widths[self.depth()]
    }

    pub fn flavor(&self) -> FcFlavor {
        self.flavor
    }

    /// Whether layer `l` (1-based) carries a scale vector.
    pub fn has_scale(&self, l: usize) -> bool {
        self.flavor == FcFlavor::Scaled && l < self.depth()
    }

    pub fn param_count(&self) -> usize {
        let mut m = 0;
        for l in 1..=self.depth() {
            let (d, prev) = (self.widths[l], self.widths[l - 1]);
            m += d * (prev + 1);
            if self.has_scale(l) {
                m += d;
            }
        }
        m
    }

    pub fn with_flavor(&self, flavor: FcFlavor) -> Self {
        Self { widths: self.widths.clone(), flavor }
    }
}

/// 1-D convolutional architecture: stride 1, valid padding, linear head.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawConv")]
pub struct ConvArch {
    kernels: Vec<usize>,
    channels: Vec<usize>,
    input_len: usize,
    flavor: ConvFlavor,
    #[serde(skip_serializing)]
    lengths: Vec<usize>,
}

#[derive(Deserialize)]
struct RawConv {
    kernels: Vec<usize>,
    channels: Vec<usize>,
    input_len: usize,
    flavor: ConvFlavor,
}

impl TryFrom<RawConv> for ConvArch {
    type Error = Error;
    fn try_from(raw: RawConv) -> Result<Self> {
        ConvArch::new(raw.kernels, raw.channels, raw.input_len, raw.flavor)
    }
}

impl ConvArch {
    /// `kernels` holds `k_1..k_L`, `channels` holds `c_0..c_L`.
    pub fn new(kernels: Vec<usize>, channels: Vec<usize>, input_len: usize, flavor: ConvFlavor) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::InvalidArch("need at least one conv layer".into()));
        }
        if channels.len() != kernels.len() + 1 {
            return Err(Error::InvalidArch(format!(
                "{} kernel sizes need {} channel counts, got {}",
                kernels.len(),
                kernels.len() + 1,
                channels.len()
            )));
        }
        if let Some(l) = channels.iter().position(|&c| c == 0) {
            return Err(Error::InvalidArch(format!("channel count c_{l} is zero")));
        }
        if let Some(l) = kernels.iter().position(|&k| k == 0) {
            return Err(Error::InvalidArch(format!("kernel size k_{} is zero", l + 1)));
        }
        if input_len == 0 {
            return Err(Error::InvalidArch("input length is zero".into()));
        }
        let mut lengths = Vec::with_capacity(channels.len());
        lengths.push(input_len);
        for (l, &k) in kernels.iter().enumerate() {
            let s = *lengths.last().unwrap();
            if k > s {
                return Err(Error::SpatialCollapse { layer: l + 1, input: s, kernel: k });
            }
            lengths.push(s - k + 1);
        }
        Ok(Self { kernels, channels, input_len, flavor, lengths })
    }

    pub fn depth(&self) -> usize {
        self.kernels.len()
    }

    pub fn kernels(&self) -> &[usize] {
        &self.kernels
    }

    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    /// Spatial lengths `s_0..s_L`.
    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn flavor(&self) -> ConvFlavor {
        self.flavor
    }

    /// Flattened input size `c_0 * s_0`.
    pub fn input_dim(&self) -> usize {
        self.channels[0] * self.input_len
    }

    /// Head width `d_s = c_L * s_L`.
    pub fn head_width(&self) -> usize {
        self.channels[self.depth()] * self.lengths[self.depth()]
    }

    pub fn param_count(&self) -> usize {
        let mut m = 0;
        for l in 1..=self.depth() {
            let (c, prev, k) = (self.channels[l], self.channels[l - 1], self.kernels[l - 1]);
            m += c * (prev * k + 1);
            if self.flavor == ConvFlavor::Scaled {
                m += c;
            }
        }
        m + self.head_width() + 1
    }

    pub fn with_flavor(&self, flavor: ConvFlavor) -> Self {
        Self { flavor, ..self.clone() }
    }
}

/// Any of the four supported architectures.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Architecture {
    Fc(FcArch),
    Conv(ConvArch),
}

impl Architecture {
    pub fn param_count(&self) -> usize {
        match self {
            Architecture::Fc(a) => a.param_count(),
            Architecture::Conv(a) => a.param_count(),
        }
    }

    /// Length of a flattened input vector.
    pub fn input_dim(&self) -> usize {
        match self {
            Architecture::Fc(a) => a.input_dim(),
            Architecture::Conv(a) => a.input_dim(),
        }
    }

    pub fn kind(&self) -> ArchKind {
        match self {
            Architecture::Fc(a) if a.flavor() == FcFlavor::Vanilla => ArchKind::Fc,
            Architecture::Fc(_) => ArchKind::ScaledFc,
            Architecture::Conv(a) if a.flavor() == ConvFlavor::Plain => ArchKind::Cnn,
            Architecture::Conv(_) => ArchKind::Scn,
        }
    }

    pub fn as_fc(&self) -> Option<&FcArch> {
        match self {
            Architecture::Fc(a) => Some(a),
            Architecture::Conv(_) => None,
        }
    }

    pub fn as_conv(&self) -> Option<&ConvArch> {
        match self {
            Architecture::Conv(a) => Some(a),
            Architecture::Fc(_) => None,
        }
    }
}

impl From<FcArch> for Architecture {
    fn from(a: FcArch) -> Self {
        Architecture::Fc(a)
    }
}

impl From<ConvArch> for Architecture {
    fn from(a: ConvArch) -> Self {
        Architecture::Conv(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArchKind {
    Fc,
    ScaledFc,
    Cnn,
    Scn,
}

impl ArchKind {
    pub fn name(&self) -> &'static str {
        match self {
            ArchKind::Fc => "fc",
            ArchKind::ScaledFc => "scaled-fc",
            ArchKind::Cnn => "cnn",
            ArchKind::Scn => "scn",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn activations_fix_zero() {
        for act in [Activation::Relu, Activation::LeakyRelu(0.01), Activation::LeakyRelu(-2.0)] {
            assert_eq!(act.apply(0.0), 0.0);
        }
        assert_eq!(Activation::Relu.apply(-3.0), 0.0);
        assert_eq!(Activation::LeakyRelu(0.5).apply(-3.0), -1.5);
        assert!(Activation::leaky(0.0).is_err());
        assert!(Activation::leaky(1.0).is_err());
        assert!(Activation::leaky(f64::NAN).is_err());
    }

    #[test]
    fn fc_counts() {
        assert_eq!(FcArch::vanilla(&[1, 2, 1]).unwrap().param_count(), 7);
        // 5 * (3 + 2) hidden with scales, 1 * (5 + 1) head without.
        assert_eq!(FcArch::scaled(&[3, 5, 1]).unwrap().param_count(), 31);
        assert_eq!(FcArch::vanilla(&[3, 5, 1]).unwrap().param_count(), 26);
        assert!(FcArch::vanilla(&[3]).is_err());
        assert!(FcArch::vanilla(&[3, 0, 1]).is_err());
    }

    #[test]
    fn conv_counts_and_lengths() {
        let a = ConvArch::new(vec![2], vec![1, 1], 3, ConvFlavor::Plain).unwrap();
        assert_eq!(a.param_count(), 6);
        assert_eq!(a.lengths(), &[3, 2]);
        assert_eq!(a.head_width(), 2);
        let b = ConvArch::new(vec![2], vec![1, 2], 3, ConvFlavor::Plain).unwrap();
        assert_eq!(b.param_count(), 11);
        let c = ConvArch::new(vec![1], vec![1, 2], 2, ConvFlavor::Scaled).unwrap();
        assert_eq!(c.param_count(), 11);
        assert_eq!(
            ConvArch::new(vec![2, 3], vec![1, 1, 1], 3, ConvFlavor::Plain),
            Err(Error::SpatialCollapse { layer: 2, input: 2, kernel: 3 })
        );
    }
}
