//! Closed-form effective sample complexities (nats) and the sample sizes
//! they imply.

mod cont;
mod scale;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

pub use cont::{cap_log_mass, chat_cont, margin_gamma, ContComplexity};
pub use scale::{solve_teacher_scale, HeadRule, TeacherScale};

use crate::error::check_open;
use crate::quantnet::{ArchKind, Architecture};
use crate::{Error, Result};

/// Nats to bits.
pub fn to_bits(nats: f64) -> f64 {
    nats / core::f64::consts::LN_2
}

fn check_widths(teacher: &[usize], student: &[usize]) -> Result<()> {
    if teacher.len() != student.len() {
        return Err(Error::Shape { what: "layer count", layer: 0, expected: student.len(), actual: teacher.len() });
    }
    for (l, (&t, &s)) in teacher.iter().zip(student).enumerate() {
        if t > s {
            return Err(Error::WidthViolation { layer: l + 1, teacher: t, student: s });
        }
    }
    Ok(())
}

/// Exponent of the vanilla FC bound: `Σ_l d*_l d_{l-1} + d*_l`.
/// `teacher` and `student` hold widths `d_1..d_L`.
pub fn pc_fc(d0: usize, teacher: &[usize], student: &[usize]) -> Result<usize> {
    check_widths(teacher, student)?;
    let mut prev = d0;
    let mut pc = 0;
    for (&t, &s) in teacher.iter().zip(student) {
        pc += t * prev + t;
        prev = s;
    }
    Ok(pc)
}

/// Exponent of the scaled FC bound: `Σ_l d*_l d*_{l-1} + 2 d_l`.
pub fn pc_sfc(d0: usize, teacher: &[usize], student: &[usize]) -> Result<usize> {
    check_widths(teacher, student)?;
    let mut prev = d0;
    let mut pc = 0;
    for (&t, &s) in teacher.iter().zip(student) {
        pc += t * prev + 2 * s;
        prev = t;
    }
    Ok(pc)
}

pub fn chat_fc(d0: usize, teacher: &[usize], student: &[usize], q: usize) -> Result<f64> {
    Ok(pc_fc(d0, teacher, student)? as f64 * ln_q(q)?)
}

pub fn chat_sfc(d0: usize, teacher: &[usize], student: &[usize], q: usize) -> Result<f64> {
    Ok(pc_sfc(d0, teacher, student)? as f64 * ln_q(q)?)
}

fn ln_q(q: usize) -> Result<f64> {
    if q < 2 {
        return Err(Error::InvalidGrid("a grid needs at least two levels"));
    }
    Ok((q as f64).ln())
}

fn check_channels(teacher: &[usize], student: &[usize], kernels: &[usize]) -> Result<()> {
    if kernels.len() + 1 != student.len() {
        return Err(Error::Shape {
            what: "channel count",
            layer: 0,
            expected: kernels.len() + 1,
            actual: student.len(),
        });
    }
    if teacher.first() != student.first() {
        return Err(Error::Dimension { expected: student[0], actual: teacher.first().copied().unwrap_or(0) });
    }
    check_widths(&teacher[1..], &student[1..])
}

/// CNN exponent `d_s + 1 + Σ_l k_l c*_l c_{l-1} + c*_l`. Channel slices hold
/// `c_0..c_L`; `d_s` is the student head width.
pub fn pc_cnn(teacher: &[usize], student: &[usize], kernels: &[usize], d_s: usize) -> Result<usize> {
    check_channels(teacher, student, kernels)?;
    let mut pc = d_s + 1;
    for l in 1..student.len() {
        pc += kernels[l - 1] * teacher[l] * student[l - 1] + teacher[l];
    }
    Ok(pc)
}

/// SCN exponent `d*_s + 1 + Σ_l k_l c*_l c*_{l-1} + 2 c_l`; `d_s_star` is the
/// teacher head width.
pub fn pc_scn(teacher: &[usize], student: &[usize], kernels: &[usize], d_s_star: usize) -> Result<usize> {
    check_channels(teacher, student, kernels)?;
    let mut pc = d_s_star + 1;
    for l in 1..student.len() {
        pc += kernels[l - 1] * teacher[l] * teacher[l - 1] + 2 * student[l];
    }
    Ok(pc)
}

pub fn chat_cnn(teacher: &[usize], student: &[usize], kernels: &[usize], d_s: usize, q: usize) -> Result<f64> {
    Ok(pc_cnn(teacher, student, kernels, d_s)? as f64 * ln_q(q)?)
}

pub fn chat_scn(teacher: &[usize], student: &[usize], kernels: &[usize], d_s_star: usize, q: usize) -> Result<f64> {
    Ok(pc_scn(teacher, student, kernels, d_s_star)? as f64 * ln_q(q)?)
}

/// Bound exponent for a teacher/student pair of the same kind.
pub fn pc_for(teacher: &Architecture, student: &Architecture) -> Result<usize> {
    if teacher.kind() != student.kind() {
        return Err(Error::Flavor { expected: student.kind().name(), actual: teacher.kind().name() });
    }
    match (teacher, student) {
        (Architecture::Fc(t), Architecture::Fc(s)) => {
            if t.input_dim() != s.input_dim() {
                return Err(Error::Dimension { expected: s.input_dim(), actual: t.input_dim() });
            }
            let (tw, sw) = (&t.widths()[1..], &s.widths()[1..]);
            match student.kind() {
                ArchKind::Fc => pc_fc(s.input_dim(), tw, sw),
                _ => pc_sfc(s.input_dim(), tw, sw),
            }
        }
        (Architecture::Conv(t), Architecture::Conv(s)) => {
            if t.kernels() != s.kernels() {
                let l = t.kernels().iter().zip(s.kernels()).position(|(a, b)| a != b).unwrap_or(0);
                return Err(Error::KernelMismatch {
                    layer: l + 1,
                    teacher: t.kernels().get(l).copied().unwrap_or(0),
                    student: s.kernels().get(l).copied().unwrap_or(0),
                });
            }
            match student.kind() {
                ArchKind::Cnn => pc_cnn(t.channels(), s.channels(), s.kernels(), s.head_width()),
                _ => pc_scn(t.channels(), s.channels(), s.kernels(), t.head_width()),
            }
        }
        _ => unreachable!("kinds already match"),
    }
}

/// Full complexity `M(D) ln Q` of a vanilla FC class, `widths = d_1..d_L`.
pub fn complexity_fc(d0: usize, widths: &[usize], q: usize) -> Result<f64> {
    let mut prev = d0;
    let mut m = 0;
    for &d in widths {
        m += d * (prev + 1);
        prev = d;
    }
    Ok(m as f64 * ln_q(q)?)
}

/// Full complexity of a scaled FC class with the printed count
/// `Σ_l d_l (d_{l-1} + 2)`, i.e. two extras on every layer.
pub fn complexity_sfc(d0: usize, widths: &[usize], q: usize) -> Result<f64> {
    let mut prev = d0;
    let mut m = 0;
    for &d in widths {
        m += d * (prev + 2);
        prev = d;
    }
    Ok(m as f64 * ln_q(q)?)
}

fn ceil_n(x: f64) -> u64 {
    x.ceil() as u64
}

fn eps_delta(bound: &'static str, eps: f64, delta: f64) -> Result<()> {
    check_open(bound, "eps", eps, 0.0, 1.0, "(0, 1)")?;
    check_open(bound, "delta", delta, 0.0, 0.2, "(0, 1/5)")
}

/// `⌈(c + 3 ln(2/δ)) / ε⌉`, for ε ∈ (0,1), δ ∈ (0,1/5).
pub fn n_lemma1(c_hat: f64, eps: f64, delta: f64) -> Result<u64> {
    eps_delta("n_lemma1", eps, delta)?;
    Ok(ceil_n((c_hat + 3.0 * (2.0 / delta).ln()) / eps))
}

/// `⌈(c + 6 ln(2/δ)) / ε⌉`: bad-interpolator volume at most δ w.p. 1 − δ.
pub fn n_volume(c_hat: f64, eps: f64, delta: f64) -> Result<u64> {
    eps_delta("n_volume", eps, delta)?;
    Ok(ceil_n((c_hat + 6.0 * (2.0 / delta).ln()) / eps))
}

/// Inverse of [`n_volume`]: `δ = 2 exp(−(εN − c)/6)`. Values ≥ 1 carry no
/// information.
pub fn bad_volume_delta(c_hat: f64, eps: f64, n: u64) -> f64 {
    2.0 * (-(eps * n as f64 - c_hat) / 6.0).exp()
}

/// `⌈(c + 3 ln(2/δ)) / (2ε²)⌉` for the threshold sampler, ε ∈ (0, 1/2).
pub fn n_noninterp(c_hat: f64, eps: f64, delta: f64) -> Result<u64> {
    check_open("n_noninterp", "eps", eps, 0.0, 0.5, "(0, 1/2 - eps_star)")?;
    check_open("n_noninterp", "delta", delta, 0.0, 0.2, "(0, 1/5)")?;
    Ok(ceil_n((c_hat + 3.0 * (2.0 / delta).ln()) / (2.0 * eps * eps)))
}

/// `⌈(c + ln(1/δ_S) + 2 ln ln(1/δ_h)) / ε⌉`.
pub fn n_refined(c_hat: f64, eps: f64, delta_s: f64, delta_h: f64) -> Result<u64> {
    check_open("n_refined", "eps", eps, 0.0, 1.0, "(0, 1)")?;
    check_open("n_refined", "delta_s", delta_s, 0.0, 1.0, "(0, 1)")?;
    check_open("n_refined", "delta_h", delta_h, 0.0, 0.2, "(0, 1/5)")?;
    Ok(ceil_n((c_hat + (1.0 / delta_s).ln() + 2.0 * (1.0 / delta_h).ln().ln()) / eps))
}

/// Data-dependent ε from the interpolation probability, holding w.p. 1 − η
/// over the sampler.
pub fn eps_nonuniform(p_hat: f64, n: u64, delta: f64, eta: f64) -> Result<f64> {
    check_open("eps_nonuniform", "p_hat", p_hat, 0.0, 0.5, "(0, 1/2)")?;
    check_open("eps_nonuniform", "delta", delta, 0.0, 1.0, "(0, 1)")?;
    check_open("eps_nonuniform", "eta", eta, 0.0, 1.0, "(0, 1)")?;
    let l2e = (2.0 / eta).ln();
    Ok(((1.0 / p_hat).ln() + (4.0 / delta).ln() + l2e.ln() + 2.0 * (l2e / p_hat + 1.0).ln().ln()) / n as f64)
}

/// Simplified data-dependent ε: `(ln(1/p̂) + 4 ln(8/δ) + 2 ln ln(1/p̂)) / N`.
pub fn eps_pscard(p_hat: f64, n: u64, delta: f64) -> Result<f64> {
    check_open("eps_pscard", "p_hat", p_hat, 0.0, 0.5, "(0, 1/2)")?;
    check_open("eps_pscard", "delta", delta, 0.0, 1.0, "(0, 1)")?;
    let l = (1.0 / p_hat).ln();
    Ok((l + 4.0 * (8.0 / delta).ln() + 2.0 * l.ln()) / n as f64)
}

/// PAC-Bayes plus Markov, leading constant taken as 1:
/// `⌈(c + ln(1/δ)) / (εδ)⌉`.
pub fn n_pacbayes_markov(c_hat: f64, eps: f64, delta: f64) -> Result<u64> {
    check_open("n_pacbayes_markov", "eps", eps, 0.0, f64::INFINITY, "(0, inf)")?;
    check_open("n_pacbayes_markov", "delta", delta, 0.0, 1.0, "(0, 1)")?;
    Ok(ceil_n((c_hat + (1.0 / delta).ln()) / (eps * delta)))
}

/// Complexity of the sparsest-interpolator rule:
/// `2 M* ln(M* + d_0) + M* ln Q`.
pub fn chat_sparse(m_star: usize, d0: usize, q: usize) -> Result<f64> {
    if m_star == 0 {
        return Err(Error::OutOfRange { bound: "n_sparse", param: "m_star", value: 0.0, range: "[1, inf)" });
    }
    let m = m_star as f64;
    Ok(2.0 * m * (m + d0 as f64).ln() + m * ln_q(q)?)
}

/// `⌈(2 M* ln(M* + d_0) + M* ln Q + ln(1/δ)) / ε⌉`.
pub fn n_sparse(m_star: usize, d0: usize, q: usize, eps: f64, delta: f64) -> Result<u64> {
    check_open("n_sparse", "eps", eps, 0.0, f64::INFINITY, "(0, inf)")?;
    check_open("n_sparse", "delta", delta, 0.0, 1.0, "(0, 1)")?;
    Ok(ceil_n((chat_sparse(m_star, d0, q)? + (1.0 / delta).ln()) / eps))
}

/// Whether the scaled-FC complexity is below the sparse-rule complexity.
pub fn sfc_beats_sparse(chat_sfc: f64, m_star: usize, d0: usize, q: usize) -> Result<bool> {
    Ok(chat_sfc < chat_sparse(m_star, d0, q)?)
}

/// A named complexity and the sample size it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub c_hat: f64,
    pub c_hat_bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_required: Option<u64>,
    pub inputs: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    pub fn new(name: &str, c_hat: f64) -> Self {
        Self {
            name: name.to_string(),
            c_hat,
            c_hat_bits: to_bits(c_hat),
            n_required: None,
            inputs: BTreeMap::new(),
            note: None,
        }
    }

    pub fn input(mut self, key: &str, value: f64) -> Self {
        self.inputs.insert(key.to_string(), value);
        self
    }

    pub fn n(mut self, n: u64) -> Self {
        self.n_required = Some(n);
        self
    }

    pub fn note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }
}
