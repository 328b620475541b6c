//! Placing a narrow teacher inside a wider student so that both compute the
//! same function for every input.

use alloc::vec;
use alloc::vec::Vec;

use super::TeacherSpec;
use crate::quantnet::{ArchKind, Architecture, ConvArch, FcArch, Layout, QuantParams};
use crate::{Error, Result};

/// Embedded student parameters plus which entries the construction fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub params: QuantParams,
    pub constrained: Vec<bool>,
}

impl Embedding {
    pub fn constrained_count(&self) -> usize {
        self.constrained.iter().filter(|&&c| c).count()
    }
}

struct Builder {
    out: Vec<f64>,
    fixed: Vec<bool>,
}

impl Builder {
    fn new(filler: &[f64]) -> Self {
        Self { out: filler.to_vec(), fixed: vec![false; filler.len()] }
    }

    fn set(&mut self, at: usize, v: f64) {
        self.out[at] = v;
        self.fixed[at] = true;
    }

    fn finish(self, arch: &Architecture) -> Result<Embedding> {
        Ok(Embedding { params: QuantParams::from_values(arch, self.out)?, constrained: self.fixed })
    }
}

fn filler_for<'f>(
    student: &Architecture,
    filler: Option<&'f QuantParams>,
    zeros: &'f mut Vec<f64>,
) -> Result<&'f [f64]> {
    match filler {
        Some(f) => {
            f.check_arch(student)?;
            Ok(f.values())
        }
        None => {
            *zeros = vec![0.0; student.param_count()];
            Ok(zeros)
        }
    }
}

fn fc_widths_ok(teacher: &FcArch, student: &FcArch) -> Result<()> {
    let (t, s) = (teacher.widths(), student.widths());
    if t.len() != s.len() {
        return Err(Error::Shape { what: "depth", layer: 0, expected: s.len() - 1, actual: t.len() - 1 });
    }
    if t[0] != s[0] {
        return Err(Error::Dimension { expected: s[0], actual: t[0] });
    }
    for l in 1..t.len() {
        if t[l] > s[l] {
            return Err(Error::WidthViolation { layer: l, teacher: t[l], student: s[l] });
        }
    }
    let last = t.len() - 1;
    if t[last] != s[last] {
        return Err(Error::Shape { what: "output width", layer: last, expected: s[last], actual: t[last] });
    }
    Ok(())
}

fn expect(arch: &Architecture, want: ArchKind) -> Result<()> {
    if arch.kind() != want {
        return Err(Error::Flavor { expected: want.name(), actual: arch.kind().name() });
    }
    Ok(())
}

/// Vanilla FC: teacher block copied, cross block from extra units zeroed.
pub fn embed_teacher_fc(teacher: &TeacherSpec, student: &FcArch, filler: Option<&QuantParams>) -> Result<Embedding> {
    expect(&teacher.arch, ArchKind::Fc)?;
    let sarch: Architecture = student.clone().into();
    expect(&sarch, ArchKind::Fc)?;
    let tarch = teacher.arch.as_fc().unwrap();
    fc_widths_ok(tarch, student)?;
    let mut zeros = Vec::new();
    let mut b = Builder::new(filler_for(&sarch, filler, &mut zeros)?);
    let tp = teacher.params.values();
    let (tl, sl) = (Layout::fc(tarch), Layout::fc(student));
    for (t, s) in tl.layers.iter().zip(&sl.layers) {
        for i in 0..t.outputs {
            for j in 0..s.inputs {
                let v = if j < t.inputs { tp[t.weights + i * t.inputs + j] } else { 0.0 };
                b.set(s.weights + i * s.inputs + j, v);
            }
            b.set(s.bias + i, tp[t.bias + i]);
        }
    }
    b.finish(&sarch)
}

/// Scaled FC: teacher block, scales and biases copied; extra units get zero
/// scale and zero bias, so they output `σ(0) = 0` whatever their weights.
pub fn embed_teacher_sfc(teacher: &TeacherSpec, student: &FcArch, filler: Option<&QuantParams>) -> Result<Embedding> {
    expect(&teacher.arch, ArchKind::ScaledFc)?;
    let sarch: Architecture = student.clone().into();
    expect(&sarch, ArchKind::ScaledFc)?;
    let tarch = teacher.arch.as_fc().unwrap();
    fc_widths_ok(tarch, student)?;
    let mut zeros = Vec::new();
    let mut b = Builder::new(filler_for(&sarch, filler, &mut zeros)?);
    let tp = teacher.params.values();
    let (tl, sl) = (Layout::fc(tarch), Layout::fc(student));
    for (t, s) in tl.layers.iter().zip(&sl.layers) {
        for i in 0..s.outputs {
            if i < t.outputs {
                for j in 0..t.inputs {
                    b.set(s.weights + i * s.inputs + j, tp[t.weights + i * t.inputs + j]);
                }
                b.set(s.bias + i, tp[t.bias + i]);
                if let (Some(sg), Some(tg)) = (s.scale, t.scale) {
                    b.set(sg + i, tp[tg + i]);
                }
            } else {
                b.set(s.bias + i, 0.0);
                if let Some(sg) = s.scale {
                    b.set(sg + i, 0.0);
                }
            }
        }
    }
    b.finish(&sarch)
}

fn conv_shapes_ok(teacher: &ConvArch, student: &ConvArch) -> Result<()> {
    if teacher.depth() != student.depth() {
        return Err(Error::Shape { what: "depth", layer: 0, expected: student.depth(), actual: teacher.depth() });
    }
    for (l, (&kt, &ks)) in teacher.kernels().iter().zip(student.kernels()).enumerate() {
        if kt != ks {
            return Err(Error::KernelMismatch { layer: l + 1, teacher: kt, student: ks });
        }
    }
    if teacher.input_dim() != student.input_dim() || teacher.channels()[0] != student.channels()[0] {
        return Err(Error::Dimension { expected: student.input_dim(), actual: teacher.input_dim() });
    }
    for (l, (&ct, &cs)) in teacher.channels().iter().zip(student.channels()).enumerate().skip(1) {
        if ct > cs {
            return Err(Error::WidthViolation { layer: l, teacher: ct, student: cs });
        }
    }
    Ok(())
}

/// CNN or SCN, chosen by the flavor of both architectures.
///
/// Plain: teacher kernels copied, kernels reading extra input channels
/// zeroed, head weights on extra channels zeroed. Scaled: extra channels get
/// zero scale and zero bias instead, leaving their kernels and head weights free.
pub fn embed_teacher_conv(
    teacher: &TeacherSpec,
    student: &ConvArch,
    filler: Option<&QuantParams>,
) -> Result<Embedding> {
    let sarch: Architecture = student.clone().into();
    let kind = sarch.kind();
    expect(&teacher.arch, kind)?;
    let tarch =
        teacher.arch.as_conv().ok_or(Error::Flavor { expected: kind.name(), actual: teacher.arch.kind().name() })?;
    conv_shapes_ok(tarch, student)?;
    let scaled = kind == ArchKind::Scn;
    let mut zeros = Vec::new();
    let mut b = Builder::new(filler_for(&sarch, filler, &mut zeros)?);
    let tp = teacher.params.values();
    let (tl, sl) = (Layout::conv(tarch), Layout::conv(student));
    for (t, s) in tl.layers.iter().zip(&sl.layers) {
        let k = s.kernel;
        for o in 0..s.outputs {
            if o < t.outputs {
                let inputs = if scaled { t.inputs } else { s.inputs };
                for j in 0..inputs {
                    for tap in 0..k {
                        let v = if j < t.inputs { tp[t.weights + (o * t.inputs + j) * k + tap] } else { 0.0 };
                        b.set(s.weights + (o * s.inputs + j) * k + tap, v);
                    }
                }
                b.set(s.bias + o, tp[t.bias + o]);
                if let (Some(sg), Some(tg)) = (s.scale, t.scale) {
                    b.set(sg + o, tp[tg + o]);
                }
            } else if scaled {
                b.set(s.bias + o, 0.0);
                b.set(s.scale.unwrap() + o, 0.0);
            }
        }
    }
    // Channel-major flattening puts the teacher's channels first.
    let (th, sh) = (tl.head.unwrap(), sl.head.unwrap());
    let (dt, ds) = (tarch.head_width(), student.head_width());
    for i in 0..ds {
        if i < dt {
            b.set(sh + i, tp[th + i]);
        } else if !scaled {
            b.set(sh + i, 0.0);
        }
    }
    b.set(sh + ds, tp[th + dt]);
    b.finish(&sarch)
}

/// Dispatches on the student's architecture kind.
pub fn embed_teacher(teacher: &TeacherSpec, student: &Architecture, filler: Option<&QuantParams>) -> Result<Embedding> {
    match student {
        Architecture::Fc(a) if student.kind() == ArchKind::Fc => embed_teacher_fc(teacher, a, filler),
        Architecture::Fc(a) => embed_teacher_sfc(teacher, a, filler),
        Architecture::Conv(a) => embed_teacher_conv(teacher, a, filler),
    }
}
