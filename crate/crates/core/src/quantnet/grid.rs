use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The finite set of values every quantized parameter is drawn from.
///
/// Levels are strictly increasing and contain `0.0` exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QuantGrid {
    levels: Vec<f64>,
    zero: usize,
}

impl QuantGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidGrid("a grid needs at least two levels"));
        }
        if levels.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("levels must be finite"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("levels must be strictly increasing"));
        }
        let zero = levels.iter().position(|&v| v == 0.0).ok_or(Error::InvalidGrid("levels must contain zero"))?;
        Ok(Self { levels, zero })
    }

    /// Integer grid of size `q`: `{-q/2, ..., q/2 - 1}` for even `q`,
    /// `{-(q-1)/2, ..., (q-1)/2}` for odd `q`.
    pub fn integers(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidGrid("a grid needs at least two levels"));
        }
        let lo = -((q / 2) as i64);
        Self::new((0..q as i64).map(|i| (lo + i) as f64).collect())
    }

    /// Number of levels, `Q`.
    #[inline]
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    #[inline]
    pub fn level(&self, index: usize) -> f64 {
        self.levels[index]
    }

    #[inline]
    pub fn zero_index(&self) -> usize {
        self.zero
    }

    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.levels.iter().position(|&v| v == value)
    }

    pub fn contains(&self, value: f64) -> bool {
        self.index_of(value).is_some()
    }

    /// Fills `out` with i.i.d. uniform levels.
    pub fn fill_uniform<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let q = self.levels.len();
        for v in out {
            *v = self.levels[rng.random_range(0..q)];
        }
    }

    /// `ln Q`.
    pub fn ln_size(&self) -> f64 {
        (self.len() as f64).ln()
    }
}

impl TryFrom<Vec<f64>> for QuantGrid {
    type Error = Error;

    fn try_from(levels: Vec<f64>) -> Result<Self> {
        Self::new(levels)
    }
}

impl From<QuantGrid> for Vec<f64> {
    fn from(grid: QuantGrid) -> Self {
        grid.levels
    }
}
