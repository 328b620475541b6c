use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::chat_scn;
use crate::{Error, Result};

/// How the teacher's head width follows from its last channel count:
/// `d*_s = positions * c*_L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadRule {
    pub positions: usize,
}

impl HeadRule {
    /// One position per channel, as after global pooling.
    pub const POOLED: HeadRule = HeadRule { positions: 1 };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherScale {
    pub alpha: f64,
    pub teacher_channels: Vec<usize>,
    pub head_width: usize,
    /// Weights, biases, channel scales and head of the scaled teacher.
    pub teacher_params: u64,
    pub chat: f64,
    /// `N ε - 3 ln(2/δ)`.
    pub budget: f64,
    /// True when a student-sized teacher already fits.
    pub saturated: bool,
}

fn scaled_channels(channels: &[usize], alpha: f64) -> Vec<usize> {
    let mut out = Vec::with_capacity(channels.len());
    out.push(channels[0]);
    for &c in &channels[1..] {
        // Guard against `0.125 * 64 = 8.000000000000002`.
        let v = (alpha * c as f64 - 1e-9).ceil() as usize;
        out.push(v.clamp(1, c));
    }
    out
}

fn teacher_params(channels: &[usize], kernels: &[usize], head: usize) -> u64 {
    let mut m = head as u64 + 1;
    for l in 1..channels.len() {
        m += (kernels[l - 1] * channels[l] * channels[l - 1] + 2 * channels[l]) as u64;
    }
    m
}

/// Largest uniform width ratio `α ∈ (0, 1]` whose channel-scaled teacher
/// (`c*_l = ⌈α c_l⌉`) keeps the SCN complexity within `N ε - 3 ln(2/δ)`.
/// Bisection to within `1e-3`.
pub fn solve_teacher_scale(
    channels: &[usize],
    kernels: &[usize],
    head: HeadRule,
    n: u64,
    eps: f64,
    delta: f64,
    q: usize,
) -> Result<TeacherScale> {
    if channels.len() != kernels.len() + 1 || channels.contains(&0) || kernels.contains(&0) {
        return Err(Error::InvalidArch(format!(
            "{} channel counts and {} kernel sizes do not describe a conv stack",
            channels.len(),
            kernels.len()
        )));
    }
    crate::error::check_open("solve_teacher_scale", "eps", eps, 0.0, 1.0, "(0, 1)")?;
    crate::error::check_open("solve_teacher_scale", "delta", delta, 0.0, 0.2, "(0, 1/5)")?;
    let budget = n as f64 * eps - 3.0 * (2.0 / delta).ln();
    if budget <= 0.0 {
        return Err(Error::NoTeacherScale(format!(
            "N eps = {} does not exceed 3 ln(2/delta) = {}",
            n as f64 * eps,
            3.0 * (2.0 / delta).ln()
        )));
    }
    let eval = |alpha: f64| -> Result<(Vec<usize>, usize, f64)> {
        let tc = scaled_channels(channels, alpha);
        let head_width = head.positions * tc[tc.len() - 1];
        let c = chat_scn(&tc, channels, kernels, head_width, q)?;
        Ok((tc, head_width, c))
    };
    let finish = |alpha: f64, saturated: bool| -> Result<TeacherScale> {
        let (tc, head_width, chat) = eval(alpha)?;
        Ok(TeacherScale {
            alpha,
            teacher_params: teacher_params(&tc, kernels, head_width),
            teacher_channels: tc,
            head_width,
            chat,
            budget,
            saturated,
        })
    };
    if eval(1.0)?.2 <= budget {
        return finish(1.0, true);
    }
    let floor = eval(f64::MIN_POSITIVE)?.2;
    if floor > budget {
        return Err(Error::NoTeacherScale(format!(
            "one channel per layer already needs {floor:.3} nats against a budget of {budget:.3}"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if eval(mid)?.2 <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    finish(lo.max(f64::MIN_POSITIVE), false)
}
