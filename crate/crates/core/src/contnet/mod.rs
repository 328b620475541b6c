//! Two-layer continuous LReLU networks with spherical weights: angular
//! margins, activation matching and the margin-density experiment.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{cap_log_mass, margin_gamma};
use crate::exec::Executor;
use crate::quantnet::sign_label;
use crate::rng::Streams;
use crate::teacher::Points;
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-9;

/// `x ↦ Σ_i z_i σ(w_i · x)` with unit-norm rows `w_i` and unit `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContTwoLayer {
    d0: usize,
    w1: Vec<f64>,
    z: Vec<f64>,
    rho: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ContTwoLayer {
    /// `w1` is row-major `d1 x d0`.
    pub fn new(d0: usize, w1: Vec<f64>, z: Vec<f64>, rho: f64) -> Result<Self> {
        if d0 == 0 || z.is_empty() || w1.len() != d0 * z.len() {
            return Err(Error::Shape {
                what: "first-layer weights",
                layer: 1,
                expected: d0 * z.len(),
                actual: w1.len(),
            });
        }
        for (i, row) in w1.chunks_exact(d0).enumerate() {
            let n = norm(row);
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::NotUnit { what: "first-layer row", index: i, norm: n });
            }
        }
        let n = norm(&z);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { what: "second-layer vector", index: 0, norm: n });
        }
        if !rho.is_finite() {
            return Err(Error::InvalidActivation(rho));
        }
        Ok(Self { d0, w1, z, rho })
    }

    pub fn d0(&self) -> usize {
        self.d0
    }

    pub fn d1(&self) -> usize {
        self.z.len()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w1[i * self.d0..(i + 1) * self.d0]
    }

    pub fn weights(&self) -> &[f64] {
        &self.w1
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        self.w1
            .chunks_exact(self.d0)
            .zip(&self.z)
            .map(|(w, z)| {
                let a = dot(w, x);
                z * if a > 0.0 { a } else { self.rho * a }
            })
            .sum()
    }

    /// The first `k` hidden units, second layer renormalized.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        let k = k.min(self.d1());
        let mut z = self.z[..k].to_vec();
        let n = norm(&z);
        if n == 0.0 {
            return Err(Error::ZeroNorm { index: 0 });
        }
        z.iter_mut().for_each(|v| *v /= n);
        Self::new(self.d0, self.w1[..k * self.d0].to_vec(), z, self.rho)
    }
}

fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&v);
        if n > 0.0 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

/// Rows i.i.d. uniform on `S^{d0-1}`, `z` uniform on `S^{d1-1}`.
pub fn sample_cont_prior<R: Rng + ?Sized>(d0: usize, d1: usize, rho: f64, rng: &mut R) -> Result<ContTwoLayer> {
    if d0 == 0 || d1 == 0 {
        return Err(Error::InvalidArch("continuous widths must be positive".into()));
    }
    let mut w1 = Vec::with_capacity(d0 * d1);
    for _ in 0..d1 {
        w1.extend(unit_vector(d0, rng));
    }
    let z = unit_vector(d1, rng);
    ContTwoLayer::new(d0, w1, z, rho)
}

/// Measured angular margins of a dataset under a teacher.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginStats {
    pub alpha: f64,
    pub beta: f64,
    /// Defined only when `beta > alpha`.
    pub gamma: Option<f64>,
    /// `(row, point)` attaining the first-layer minimum.
    pub alpha_at: (usize, usize),
    pub beta_at: usize,
    /// The normalized second-layer ratio exceeded 1 and was clamped.
    pub beta_clamped: bool,
}

fn point_norms(points: &Points) -> Result<Vec<f64>> {
    points
        .rows()
        .enumerate()
        .map(|(n, x)| {
            let v = norm(x);
            if v == 0.0 {
                Err(Error::ZeroNorm { index: n })
            } else {
                Ok(v)
            }
        })
        .collect()
}

fn check_dim(points: &Points, teacher: &ContTwoLayer) -> Result<()> {
    if points.dim() != teacher.d0() {
        return Err(Error::Dimension { expected: teacher.d0(), actual: points.dim() });
    }
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

/// `α = arcsin(min_{i,n} |x_n · w*_i| / ‖x_n‖)` over every teacher row.
/// Returns the angle and its `(row, point)`.
pub fn first_layer_margin(points: &Points, teacher: &ContTwoLayer) -> Result<(f64, (usize, usize))> {
    check_dim(points, teacher)?;
    let norms = point_norms(points)?;
    let mut best = (f64::INFINITY, (0, 0));
    for (n, x) in points.rows().enumerate() {
        for i in 0..teacher.d1() {
            let c = dot(teacher.row(i), x).abs() / norms[n];
            if c < best.0 {
                best = (c, (i, n));
            }
        }
    }
    Ok((best.0.min(1.0).asin(), best.1))
}

/// `β = arcsin(min_n |h*(x_n)| / (‖x_n‖ ‖z*‖ √(d1 (1 + ρ²))))`, clamped to 1.
/// Returns the angle, its point and whether clamping happened.
pub fn second_layer_margin(points: &Points, teacher: &ContTwoLayer, d1: usize, rho: f64) -> Result<(f64, usize, bool)> {
    check_dim(points, teacher)?;
    let norms = point_norms(points)?;
    let scale = norm(teacher.z()) * (d1 as f64 * (1.0 + rho * rho)).sqrt();
    let mut best = (f64::INFINITY, 0);
    for (n, x) in points.rows().enumerate() {
        let r = teacher.logit(x).abs() / (norms[n] * scale);
        if r < best.0 {
            best = (r, n);
        }
    }
    let clamped = best.0 > 1.0;
    Ok((best.0.min(1.0).asin(), best.1, clamped))
}

/// Both margins and `γ` when defined.
pub fn margins(points: &Points, teacher: &ContTwoLayer, d1: usize, rho: f64) -> Result<MarginStats> {
    let (alpha, alpha_at) = first_layer_margin(points, teacher)?;
    let (beta, beta_at, beta_clamped) = second_layer_margin(points, teacher, d1, rho)?;
    let gamma = (alpha > 0.0 && beta > alpha && beta < core::f64::consts::FRAC_PI_2)
        .then(|| margin_gamma(alpha, beta).ok())
        .flatten();
    Ok(MarginStats { alpha, beta, gamma, alpha_at, beta_at, beta_clamped })
}

/// Whether the first `d1_star` student rows put every point on the same
/// side as the matching teacher rows. Both weight slices are row-major with
/// `points.dim()` columns.
pub fn activation_match_check(w_student: &[f64], w_teacher: &[f64], points: &Points, d1_star: usize) -> bool {
    let d0 = points.dim();
    (0..d1_star).all(|i| {
        let (s, t) = (&w_student[i * d0..(i + 1) * d0], &w_teacher[i * d0..(i + 1) * d0]);
        points.rows().all(|x| sign_label(dot(s, x)) == sign_label(dot(t, x)))
    })
}

/// `ln` of the interpolation-probability lower bound
/// `2^{-d1*} · m(d1, γ) · m(d0, α)^{d1*}`, `m` the spherical-cap factor.
pub fn phat_lower_bound_cont(alpha: f64, beta: f64, d0: usize, d1: usize, d1_star: usize) -> Result<f64> {
    Ok(-crate::bounds::chat_cont(d0, d1, d1_star, alpha, beta)?.exact)
}

/// Spherical-cap factor, re-exported for callers assembling the bound by hand.
pub fn cap_factor_ln(d: usize, theta: f64) -> f64 {
    cap_log_mass(d, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginConfig {
    pub d0: usize,
    pub d1: usize,
    pub d1_star: usize,
    pub rho: f64,
    pub n: usize,
    pub trials: usize,
}

impl MarginConfig {
    /// Full-scale setting; hours of compute.
    pub const FULL: MarginConfig =
        MarginConfig { d0: 500, d1: 10_000, d1_star: 1_000, rho: 0.01, n: 50_000, trials: 1_000 };

    pub const DESK: MarginConfig = MarginConfig { d0: 50, d1: 1_000, d1_star: 100, rho: 0.01, n: 5_000, trials: 100 };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginTrial {
    pub trial: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `ln(β/α)`; absent for degenerate trials.
    pub log_ratio: Option<f64>,
    pub degenerate: bool,
    pub beta_clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub config: MarginConfig,
    pub seed: u64,
    pub trials: Vec<MarginTrial>,
    pub degenerate: usize,
    /// Among non-degenerate trials.
    pub fraction_beta_gt_alpha: f64,
}

impl MarginReport {
    pub fn log_ratios(&self) -> Vec<f64> {
        self.trials.iter().filter_map(|t| t.log_ratio).collect()
    }
}

/// One trial: Gaussian data, a spherical teacher of `d1_star` rows, both margins.
pub fn margin_trial(cfg: &MarginConfig, streams: &Streams, trial: usize) -> Result<MarginTrial> {
    let mut rng = streams.stream(trial as u64);
    let mut data = vec![0.0; cfg.n * cfg.d0];
    data.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut rng));
    let points = Points::new(cfg.d0, data)?;
    let teacher = sample_cont_prior(cfg.d0, cfg.d1_star, cfg.rho, &mut rng)?;
    let m = margins(&points, &teacher, cfg.d1, cfg.rho)?;
    let degenerate = m.alpha == 0.0;
    Ok(MarginTrial {
        trial,
        alpha: m.alpha,
        beta: m.beta,
        log_ratio: (!degenerate && m.beta > 0.0).then(|| (m.beta / m.alpha).ln()),
        degenerate,
        beta_clamped: m.beta_clamped,
    })
}

/// Distribution of `ln(β/α)` over independent trials.
pub fn margin_density_experiment<E: Executor>(cfg: &MarginConfig, seed: u64, exec: &E) -> Result<MarginReport> {
    if cfg.trials == 0 {
        return Err(Error::EmptySet);
    }
    if cfg.d1_star > cfg.d1 {
        return Err(Error::WidthViolation { layer: 1, teacher: cfg.d1_star, student: cfg.d1 });
    }
    let streams = Streams::new(seed);
    let trials: Vec<MarginTrial> = exec
        .map_blocks(
            cfg.trials as u64,
            1,
            || (),
            |_, r| r.map(|t| margin_trial(cfg, &streams, t as usize)).collect::<Vec<_>>(),
        )
        .into_iter()
        .flatten()
        .collect::<Result<_>>()?;
    let degenerate = trials.iter().filter(|t| t.degenerate).count();
    let valid = trials.len() - degenerate;
    let above = trials.iter().filter(|t| !t.degenerate && t.beta > t.alpha).count();
    Ok(MarginReport {
        config: *cfg,
        seed,
        trials,
        degenerate,
        fraction_beta_gt_alpha: if valid == 0 { 0.0 } else { above as f64 / valid as f64 },
    })
}
