use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::arch::{Activation, ArchKind, Architecture, ConvArch, FcArch};
use super::params::{Layout, QuantParams};
use crate::{Error, Result};

/// `sign` with `sign(0) = +1`.
#[inline(always)]
pub fn sign_label(logit: f64) -> i8 {
    if logit >= 0.0 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Output {
    pub label: i8,
    pub logit: f64,
}

impl Output {
    fn from_logit(logit: f64) -> Self {
        Self { label: sign_label(logit), logit }
    }
}

/// An architecture plus activation, ready to evaluate flat parameter slices.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    arch: Architecture,
    act: Activation,
    layout: Layout,
    /// Longest hidden activation vector, for scratch sizing.
    widest: usize,
}

impl Network {
    pub fn new(arch: Architecture, act: Activation) -> Result<Self> {
        act.validate()?;
        let layout = Layout::of(&arch);
        let widest = match &arch {
            Architecture::Fc(a) => a.widths().iter().copied().max().unwrap(),
            Architecture::Conv(a) => a.channels().iter().zip(a.lengths()).map(|(c, s)| c * s).max().unwrap(),
        };
        Ok(Self { arch, act, layout, widest })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn activation(&self) -> Activation {
        self.act
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn param_count(&self) -> usize {
        self.layout.len
    }

    pub fn input_dim(&self) -> usize {
        self.arch.input_dim()
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator { net: self, a: vec![0.0; self.widest], b: vec![0.0; self.widest] }
    }

    /// Checked single evaluation.
    pub fn forward(&self, params: &QuantParams, x: &[f64]) -> Result<Output> {
        params.check_arch(&self.arch)?;
        self.check_input(x)?;
        Ok(Output::from_logit(self.evaluator().logit(params.values(), x)))
    }

    pub fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension { expected: self.input_dim(), actual: x.len() });
        }
        Ok(())
    }
}

/// Reusable scratch space for repeated unchecked evaluations.
pub struct Evaluator<'n> {
    net: &'n Network,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Evaluator<'_> {
    /// Logit of `params` at `x`. Lengths must already match the network.
    pub fn logit(&mut self, params: &[f64], x: &[f64]) -> f64 {
        debug_assert_eq!(params.len(), self.net.layout.len);
        debug_assert_eq!(x.len(), self.net.input_dim());
        match &self.net.arch {
            Architecture::Fc(_) => self.fc(params, x),
            Architecture::Conv(a) => self.conv(a, params, x),
        }
    }

    #[inline]
    pub fn label(&mut self, params: &[f64], x: &[f64]) -> i8 {
        sign_label(self.logit(params, x))
    }

    fn fc(&mut self, p: &[f64], x: &[f64]) -> f64 {
        let act = self.net.act;
        let layers = &self.net.layout.layers;
        let last = layers.len() - 1;
        let (mut cur, mut nxt) = (&mut self.a, &mut self.b);
        cur[..x.len()].copy_from_slice(x);
        for (l, s) in layers.iter().enumerate() {
            let input = &cur[..s.inputs];
            for i in 0..s.outputs {
                let row = &p[s.weights + i * s.inputs..s.weights + (i + 1) * s.inputs];
                let mut z: f64 = row.iter().zip(input).map(|(w, h)| w * h).sum();
                if let Some(g) = s.scale {
                    z *= p[g + i];
                }
                z += p[s.bias + i];
                nxt[i] = if l == last { z } else { act.apply(z) };
            }
            core::mem::swap(&mut cur, &mut nxt);
        }
        cur[0]
    }

    fn conv(&mut self, arch: &ConvArch, p: &[f64], x: &[f64]) -> f64 {
        let act = self.net.act;
        let lens = arch.lengths();
        let (mut cur, mut nxt) = (&mut self.a, &mut self.b);
        cur[..x.len()].copy_from_slice(x);
        for (l, s) in self.net.layout.layers.iter().enumerate() {
            let (sin, sout) = (lens[l], lens[l + 1]);
            let k = s.kernel;
            for o in 0..s.outputs {
                let scale = s.scale.map(|g| p[g + o]);
                let bias = p[s.bias + o];
                for pos in 0..sout {
                    let mut z = 0.0;
                    for j in 0..s.inputs {
                        let ker = &p[s.weights + (o * s.inputs + j) * k..][..k];
                        let win = &cur[j * sin + pos..][..k];
                        z += ker.iter().zip(win).map(|(w, h)| w * h).sum::<f64>();
                    }
                    if let Some(g) = scale {
                        z *= g;
                    }
                    nxt[o * sout + pos] = act.apply(z + bias);
                }
            }
            core::mem::swap(&mut cur, &mut nxt);
        }
        let h = self.net.layout.head.unwrap();
        let d = arch.head_width();
        let dot: f64 = p[h..h + d].iter().zip(&cur[..d]).map(|(w, v)| w * v).sum();
        dot + p[h + d]
    }
}

fn expect_kind(arch: &Architecture, want: ArchKind) -> Result<()> {
    let got = arch.kind();
    if got == want {
        Ok(())
    } else {
        Err(Error::Flavor { expected: want.name(), actual: got.name() })
    }
}

fn forward_kind(
    params: &QuantParams,
    arch: Architecture,
    want: ArchKind,
    act: Activation,
    x: &[f64],
) -> Result<Output> {
    expect_kind(&arch, want)?;
    Network::new(arch, act)?.forward(params, x)
}

/// Vanilla fully connected forward pass.
pub fn forward_fc(params: &QuantParams, arch: &FcArch, act: Activation, x: &[f64]) -> Result<Output> {
    forward_kind(params, arch.clone().into(), ArchKind::Fc, act, x)
}

/// Scaled-neuron fully connected forward pass.
pub fn forward_sfc(params: &QuantParams, arch: &FcArch, act: Activation, x: &[f64]) -> Result<Output> {
    forward_kind(params, arch.clone().into(), ArchKind::ScaledFc, act, x)
}

/// Plain 1-D CNN; `x` is channel-major `c_0 x s_0`.
pub fn forward_cnn(params: &QuantParams, arch: &ConvArch, act: Activation, x: &[f64]) -> Result<Output> {
    forward_kind(params, arch.clone().into(), ArchKind::Cnn, act, x)
}

/// Channel-scaled 1-D CNN.
pub fn forward_scn(params: &QuantParams, arch: &ConvArch, act: Activation, x: &[f64]) -> Result<Output> {
    forward_kind(params, arch.clone().into(), ArchKind::Scn, act, x)
}

/// Anything that maps an input vector to a ±1 label.
pub trait Predictor {
    fn input_dim(&self) -> usize;

    fn label(&self, x: &[f64]) -> i8;

    /// Labels for consecutive rows of `xs` (row length `input_dim`).
    fn labels_into(&self, xs: &[f64], out: &mut Vec<i8>) {
        out.clear();
        out.extend(xs.chunks_exact(self.input_dim()).map(|x| self.label(x)));
    }
}

/// A network together with one parameter assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub net: Network,
    pub params: QuantParams,
}

impl Model {
    pub fn new(net: Network, params: QuantParams) -> Result<Self> {
        params.check_arch(net.arch())?;
        Ok(Self { net, params })
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        self.net.evaluator().logit(self.params.values(), x)
    }
}

impl Predictor for Model {
    fn input_dim(&self) -> usize {
        self.net.input_dim()
    }

    fn label(&self, x: &[f64]) -> i8 {
        sign_label(self.logit(x))
    }

    fn labels_into(&self, xs: &[f64], out: &mut Vec<i8>) {
        let mut ev = self.net.evaluator();
        let p = self.params.values();
        out.clear();
        out.extend(xs.chunks_exact(self.input_dim()).map(|x| ev.label(p, x)));
    }
}

/// Wraps a closure as a predictor.
pub struct FnPredictor<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> i8> FnPredictor<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> i8> Predictor for FnPredictor<F> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn label(&self, x: &[f64]) -> i8 {
        (self.f)(x)
    }
}
