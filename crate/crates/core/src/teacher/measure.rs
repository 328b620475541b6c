use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{InputDomain, LabeledSet, TeacherSpec};
use crate::quantnet::{Evaluator, Predictor};
use crate::stats::Proportion;
use crate::{Error, Result};

/// Fraction of `set` that `h` labels wrongly.
pub fn empirical_error<P: Predictor + ?Sized>(h: &P, set: &LabeledSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if set.dim() != h.input_dim() {
        return Err(Error::Dimension { expected: h.input_dim(), actual: set.dim() });
    }
    let mut out = Vec::with_capacity(set.len());
    h.labels_into(set.points().as_flat(), &mut out);
    let wrong = out.iter().zip(set.labels()).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / set.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ErrorMode {
    Exact,
    MonteCarlo { samples: usize },
}

/// Population disagreement with the teacher.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
    pub exact: bool,
}

/// `P(h(x) != teacher(x))` over `domain`, exactly or with a 95%
/// Clopper–Pearson interval.
pub fn population_error<H, T, R>(
    h: &H,
    teacher: &T,
    domain: &InputDomain,
    mode: ErrorMode,
    rng: &mut R,
) -> Result<ErrorEstimate>
where
    H: Predictor + ?Sized,
    T: Predictor + ?Sized,
    R: Rng + ?Sized,
{
    let (points, exact) = match mode {
        ErrorMode::Exact => (domain.enumerate()?, true),
        ErrorMode::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(Error::EmptySet);
            }
            (domain.sample(samples, rng), false)
        }
    };
    for dim in [h.input_dim(), teacher.input_dim()] {
        if dim != domain.dim() {
            return Err(Error::Dimension { expected: domain.dim(), actual: dim });
        }
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    h.labels_into(points.as_flat(), &mut a);
    teacher.labels_into(points.as_flat(), &mut b);
    let wrong = a.iter().zip(&b).filter(|(x, y)| x != y).count() as u64;
    let n = points.len() as u64;
    if exact {
        let e = wrong as f64 / n as f64;
        Ok(ErrorEstimate { estimate: e, ci_low: e, ci_high: e, samples: n, exact })
    } else {
        let p = Proportion::new(wrong, n);
        Ok(ErrorEstimate { estimate: p.estimate, ci_low: p.ci_low, ci_high: p.ci_high, samples: n, exact })
    }
}

/// Teacher labels on a fixed evaluation set: the whole support of an
/// enumerable domain, or a Monte-Carlo sample. Population error of many
/// hypotheses is then a disagreement count against the same set.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    pub set: LabeledSet,
    pub exact: bool,
}

impl ReferenceSet {
    pub fn new<R: Rng + ?Sized>(
        teacher: &TeacherSpec,
        domain: &InputDomain,
        mode: ErrorMode,
        rng: &mut R,
    ) -> Result<Self> {
        let (points, exact) = match mode {
            ErrorMode::Exact => (domain.enumerate()?, true),
            ErrorMode::MonteCarlo { samples } => {
                if samples == 0 {
                    return Err(Error::EmptySet);
                }
                (domain.sample(samples, rng), false)
            }
        };
        Ok(Self { set: teacher.label_points(&points)?, exact })
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// Number of reference points where `params` disagrees with the teacher.
    pub fn mistakes(&self, ev: &mut Evaluator<'_>, params: &[f64]) -> usize {
        self.set.iter().filter(|(x, y)| ev.label(params, x) != *y).count()
    }

    pub fn error(&self, ev: &mut Evaluator<'_>, params: &[f64]) -> f64 {
        self.mistakes(ev, params) as f64 / self.len() as f64
    }

    pub fn estimate(&self, ev: &mut Evaluator<'_>, params: &[f64]) -> ErrorEstimate {
        let wrong = self.mistakes(ev, params) as u64;
        let n = self.len() as u64;
        if self.exact {
            let e = wrong as f64 / n as f64;
            ErrorEstimate { estimate: e, ci_low: e, ci_high: e, samples: n, exact: true }
        } else {
            let p = Proportion::new(wrong, n);
            ErrorEstimate { estimate: p.estimate, ci_low: p.ci_low, ci_high: p.ci_high, samples: n, exact: false }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TeMode {
    Exact,
    Probe { size: usize },
}

impl TeMode {
    pub const DEFAULT_PROBE: usize = 10_000;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TeVerdict {
    Equivalent,
    NotEquivalent,
    /// No disagreement found on a finite probe; not a proof.
    ConsistentOnProbe,
    Refuted,
}

impl TeVerdict {
    /// Equivalent, or not refuted by the probe.
    pub fn accepted(&self) -> bool {
        matches!(self, TeVerdict::Equivalent | TeVerdict::ConsistentOnProbe)
    }
}

/// Teacher equivalence: certified on enumerable domains, probe-tested otherwise.
pub fn is_teacher_equivalent<H, T, R>(
    h: &H,
    teacher: &T,
    domain: &InputDomain,
    mode: TeMode,
    rng: &mut R,
) -> Result<TeVerdict>
where
    H: Predictor + ?Sized,
    T: Predictor + ?Sized,
    R: Rng + ?Sized,
{
    let (points, exact) = match mode {
        TeMode::Exact => (domain.enumerate()?, true),
        TeMode::Probe { size } => (domain.sample(size, rng), false),
    };
    if h.input_dim() != domain.dim() || teacher.input_dim() != domain.dim() {
        return Err(Error::Dimension { expected: domain.dim(), actual: h.input_dim() });
    }
    let agree = points.rows().all(|x| h.label(x) == teacher.label(x));
    Ok(match (exact, agree) {
        (true, true) => TeVerdict::Equivalent,
        (true, false) => TeVerdict::NotEquivalent,
        (false, true) => TeVerdict::ConsistentOnProbe,
        (false, false) => TeVerdict::Refuted,
    })
}
