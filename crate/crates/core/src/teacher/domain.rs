use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest hypercube dimension that is enumerated exactly.
pub const MAX_ENUM_DIM: usize = 20;

/// `n` points of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoints")]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPoints {
    dim: usize,
    data: Vec<f64>,
}

impl TryFrom<RawPoints> for Points {
    type Error = Error;
    fn try_from(raw: RawPoints) -> Result<Self> {
        Points::new(raw.dim, raw.data)
    }
}

impl Points {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDomain("points need a positive dimension".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::Dimension { expected: dim, actual: data.len() % dim });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::Dimension { expected: dim, actual: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// The first `n` points.
    pub fn prefix(&self, n: usize) -> Points {
        Points { dim: self.dim, data: self.data[..n.min(self.len()) * self.dim].to_vec() }
    }

    pub fn select(&self, idx: &[usize]) -> Points {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Points { dim: self.dim, data }
    }
}

/// The input distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputDomain {
    /// Standard normal in `dim` dimensions.
    Gaussian { dim: usize },
    /// Uniform over `{-1, +1}^dim`.
    Hypercube { dim: usize },
    /// Uniform over an explicit list of distinct points.
    Finite { points: Points },
}

impl InputDomain {
    pub fn gaussian(dim: usize) -> Result<Self> {
        Self::Gaussian { dim }.validated()
    }

    pub fn hypercube(dim: usize) -> Result<Self> {
        Self::Hypercube { dim }.validated()
    }

    pub fn finite(points: Points) -> Result<Self> {
        Self::Finite { points }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match &self {
            InputDomain::Gaussian { dim } | InputDomain::Hypercube { dim } if *dim == 0 => {
                Err(Error::InvalidDomain("dimension must be positive".into()))
            }
            InputDomain::Finite { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidDomain("finite domain has no points".into()));
                }
                for i in 0..points.len() {
                    for j in 0..i {
                        if points.row(i) == points.row(j) {
                            return Err(Error::InvalidDomain(format!("finite domain points {j} and {i} coincide")));
                        }
                    }
                }
                Ok(self)
            }
            _ => Ok(self),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InputDomain::Gaussian { dim } | InputDomain::Hypercube { dim } => *dim,
            InputDomain::Finite { points } => points.dim(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InputDomain::Gaussian { .. } => "gaussian",
            InputDomain::Hypercube { .. } => "hypercube",
            InputDomain::Finite { .. } => "finite",
        }
    }

    pub fn is_enumerable(&self) -> bool {
        match self {
            InputDomain::Gaussian { .. } => false,
            InputDomain::Hypercube { dim } => *dim <= MAX_ENUM_DIM,
            InputDomain::Finite { .. } => true,
        }
    }

    /// Every support point, each with equal mass. Hypercube corner `i` has
    /// coordinate `j` equal to `+1` when bit `j` of `i` is set.
    pub fn enumerate(&self) -> Result<Points> {
        match self {
            InputDomain::Gaussian { .. } => Err(Error::NotEnumerable("gaussian")),
            InputDomain::Hypercube { dim } if *dim > MAX_ENUM_DIM => {
                Err(Error::NotEnumerable("high-dimensional hypercube"))
            }
            InputDomain::Hypercube { dim } => {
                let n = 1usize << dim;
                let mut data = Vec::with_capacity(n * dim);
                for i in 0..n {
                    data.extend((0..*dim).map(|j| if i >> j & 1 == 1 { 1.0 } else { -1.0 }));
                }
                Points::new(*dim, data)
            }
            InputDomain::Finite { points } => Ok(points.clone()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Points {
        let dim = self.dim();
        let mut data = Vec::with_capacity(n * dim);
        match self {
            InputDomain::Gaussian { .. } => {
                data.extend((0..n * dim).map(|_| -> f64 { StandardNormal.sample(rng) }));
            }
            InputDomain::Hypercube { .. } => {
                data.extend((0..n * dim).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }));
            }
            InputDomain::Finite { points } => {
                for _ in 0..n {
                    data.extend_from_slice(points.row(rng.random_range(0..points.len())));
                }
            }
        }
        Points { dim, data }
    }
}

/// Inputs with ±1 labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    points: Points,
    labels: Vec<i8>,
}

impl LabeledSet {
    pub fn new(points: Points, labels: Vec<i8>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::Shape { what: "labels", layer: 0, expected: points.len(), actual: labels.len() });
        }
        if let Some(i) = labels.iter().position(|&y| y != 1 && y != -1) {
            return Err(Error::InvalidDomain(format!("label {} at row {i} is not ±1", labels[i])));
        }
        Ok(Self { points, labels })
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], i8)> {
        self.points.rows().zip(self.labels.iter().copied())
    }

    pub fn prefix(&self, n: usize) -> LabeledSet {
        let points = self.points.prefix(n);
        let labels = self.labels[..points.len()].to_vec();
        LabeledSet { points, labels }
    }
}
