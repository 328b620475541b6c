#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::check_open;
use crate::special::ln_beta;
use crate::{Error, Result};

const HALF_PI: f64 = core::f64::consts::FRAC_PI_2;

/// `γ = arccos(cos β / cos α)` for `0 < α < β < π/2`.
pub fn margin_gamma(alpha: f64, beta: f64) -> Result<f64> {
    check_open("margin_gamma", "alpha", alpha, 0.0, HALF_PI, "(0, pi/2)")?;
    check_open("margin_gamma", "beta", beta, 0.0, HALF_PI, "(0, pi/2)")?;
    if alpha >= beta {
        return Err(Error::MarginOrdering { alpha, beta });
    }
    Ok((beta.cos() / alpha.cos()).clamp(-1.0, 1.0).acos())
}

/// `ln[sin(θ)^{d-1} / ((d-1) B(1/2, (d-1)/2))]`; the `d = 1` limit is `-ln 2`.
pub fn cap_log_mass(d: usize, theta: f64) -> f64 {
    if d <= 1 {
        return -core::f64::consts::LN_2;
    }
    let k = (d - 1) as f64;
    k * theta.sin().ln() - k.ln() - ln_beta(0.5, k / 2.0)
}

/// Effective sample complexity of a two-layer continuous LReLU network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContComplexity {
    pub gamma: f64,
    /// `-d1* d0 ln sin α - d1 ln sin γ + ½ d1* ln d0`.
    pub asymptotic: f64,
    /// `-ln` of the finite product lower bound on the interpolation probability.
    pub exact: f64,
    /// `d1* + ln d1`: the size of the additive term the asymptotic form drops,
    /// which has no explicit constant.
    pub unmodeled_scale: f64,
}

pub fn chat_cont(d0: usize, d1: usize, d1_star: usize, alpha: f64, beta: f64) -> Result<ContComplexity> {
    if d0 == 0 || d1 == 0 || d1_star == 0 {
        return Err(Error::InvalidArch("continuous widths must be positive".into()));
    }
    if d1_star > d1 {
        return Err(Error::WidthViolation { layer: 1, teacher: d1_star, student: d1 });
    }
    let gamma = margin_gamma(alpha, beta)?;
    let (a, b, s) = (d0 as f64, d1 as f64, d1_star as f64);
    let asymptotic = -s * a * alpha.sin().ln() - b * gamma.sin().ln() + 0.5 * s * a.ln();
    let exact = s * core::f64::consts::LN_2 - cap_log_mass(d1, gamma) - s * cap_log_mass(d0, alpha);
    Ok(ContComplexity { gamma, asymptotic, exact, unmodeled_scale: s + b.ln() })
}
