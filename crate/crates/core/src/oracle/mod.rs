//! Exhaustive enumeration of `grid^M` for tiny architectures.
//!
//! Configuration index `i` has mixed-radix digits over the canonical
//! flattening, position 0 least significant; digit `k` selects grid level `k`.

mod catalog;
mod sparse;

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

pub use catalog::{bad_from_profile, FunctionCatalog, FunctionTable, PosteriorEntry};
pub use sparse::{sparsest_interpolator, Sparsest};

use crate::exec::Executor;
use crate::quantnet::{Architecture, Evaluator, Network, QuantGrid, QuantParams};
use crate::sampler::Prior;
use crate::teacher::{InputDomain, LabeledSet, Points, TeacherSpec};
use crate::{Error, Result};

/// Cap on the number of configurations an exact computation may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumBudget {
    pub max_configs: u64,
}

impl Default for EnumBudget {
    fn default() -> Self {
        Self { max_configs: 100_000_000 }
    }
}

impl EnumBudget {
    pub fn new(max_configs: u64) -> Self {
        Self { max_configs }
    }

    /// `Q^M`, checked against the budget.
    pub fn check(&self, q: usize, m: usize) -> Result<u64> {
        let configs = config_count(q, m);
        if configs > self.max_configs as u128 {
            return Err(Error::BudgetExceeded { configs, budget: self.max_configs });
        }
        Ok(configs as u64)
    }
}

/// `Q^M`, saturating at `u128::MAX`.
pub fn config_count(q: usize, m: usize) -> u128 {
    let mut n: u128 = 1;
    for _ in 0..m {
        n = n.saturating_mul(q as u128);
    }
    n
}

/// An exact probability `count / total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub count: u64,
    pub total: u64,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        self.count as f64 / self.total as f64
    }

    /// `-ln(count / total)`; infinite when the count is zero.
    pub fn neg_ln(&self) -> f64 {
        (self.total as f64).ln() - (self.count as f64).ln()
    }
}

/// Mixed-radix digits of configuration `index`.
pub fn digits_of(index: u128, q: usize, m: usize) -> Vec<usize> {
    let mut d = vec![0; m];
    let mut r = index;
    for slot in d.iter_mut() {
        *slot = (r % q as u128) as usize;
        r /= q as u128;
    }
    d
}

/// Configuration index of a digit vector.
pub fn index_of(digits: &[usize], q: usize) -> u128 {
    digits.iter().rev().fold(0u128, |acc, &d| acc * q as u128 + d as u128)
}

/// Iterator over every configuration in index order.
pub struct ConfigIter {
    grid: QuantGrid,
    arch: Architecture,
    digits: Vec<usize>,
    remaining: u64,
}

impl Iterator for ConfigIter {
    type Item = QuantParams;

    fn next(&mut self) -> Option<QuantParams> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let values = self.digits.iter().map(|&d| self.grid.level(d)).collect();
        increment(&mut self.digits, self.grid.len());
        Some(QuantParams::from_values(&self.arch, values).expect("sized by arch"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for ConfigIter {}

fn increment(digits: &mut [usize], q: usize) -> Option<usize> {
    for (pos, d) in digits.iter_mut().enumerate() {
        *d += 1;
        if *d < q {
            return Some(pos);
        }
        *d = 0;
    }
    None
}

/// All `Q^M` parameter assignments in mixed-radix order.
pub fn enumerate_params(arch: &Architecture, grid: &QuantGrid, budget: EnumBudget) -> Result<ConfigIter> {
    let m = arch.param_count();
    let total = budget.check(grid.len(), m)?;
    Ok(ConfigIter { grid: grid.clone(), arch: arch.clone(), digits: vec![0; m], remaining: total })
}

const BLOCK: u64 = 1 << 14;

/// Visits every configuration; `visit` sees the index and the flat values.
/// One accumulator per block, returned in block order.
pub(crate) fn scan<E, T, I, F>(net: &Network, grid: &QuantGrid, total: u64, exec: &E, init: I, visit: F) -> Vec<T>
where
    E: Executor,
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, &mut Evaluator<'_>, u64, &[f64]) + Sync,
{
    let m = net.param_count();
    let q = grid.len();
    exec.map_blocks(
        total,
        BLOCK,
        || net.evaluator(),
        |ev, range| {
            let mut acc = init();
            let mut digits = digits_of(range.start as u128, q, m);
            let mut values: Vec<f64> = digits.iter().map(|&d| grid.level(d)).collect();
            for i in range {
                visit(&mut acc, ev, i, &values);
                for (pos, d) in digits.iter_mut().enumerate() {
                    *d += 1;
                    if *d < q {
                        values[pos] = grid.level(*d);
                        break;
                    }
                    *d = 0;
                    values[pos] = grid.level(0);
                }
            }
            acc
        },
    )
}

fn interpolates(ev: &mut Evaluator<'_>, p: &[f64], set: &LabeledSet) -> bool {
    set.iter().all(|(x, y)| ev.label(p, x) == y)
}

/// Exact `p̂_S`: the fraction of configurations with zero training error.
/// A zero count means no interpolator exists.
pub fn exact_phat<E: Executor>(prior: &Prior, trainset: &LabeledSet, budget: EnumBudget, exec: &E) -> Result<Ratio> {
    let net = prior.network();
    if trainset.is_empty() {
        return Err(Error::EmptySet);
    }
    net.check_input(trainset.points().row(0))?;
    let total = budget.check(prior.grid.len(), net.param_count())?;
    let count = scan(
        &net,
        &prior.grid,
        total,
        exec,
        || 0u64,
        |acc, ev, _, p| {
            if interpolates(ev, p, trainset) {
                *acc += 1;
            }
        },
    )
    .into_iter()
    .sum();
    Ok(Ratio { count, total })
}

/// Exact `p̃`: the fraction of configurations that agree with the teacher on
/// every point of an enumerable domain.
pub fn exact_ptilde<E: Executor>(
    prior: &Prior,
    teacher: &TeacherSpec,
    domain: &InputDomain,
    budget: EnumBudget,
    exec: &E,
) -> Result<Ratio> {
    let reference = teacher.label_points(&domain.enumerate()?)?;
    exact_phat(prior, &reference, budget, exec)
}

/// Exact posterior over functions on `eval_points` given interpolation of
/// `trainset`. `None` when no interpolator exists.
pub fn exact_posterior<E: Executor>(
    prior: &Prior,
    trainset: &LabeledSet,
    eval_points: &Points,
    budget: EnumBudget,
    exec: &E,
) -> Result<Option<Vec<PosteriorEntry>>> {
    let catalog = FunctionCatalog::build(prior, eval_points, budget, exec)?;
    catalog.posterior(trainset)
}

/// Exact `P_{h ~ posterior}(L_D(h) >= eps)`. `None` when no interpolator exists.
#[allow(clippy::too_many_arguments)]
pub fn exact_bad_volume<E: Executor>(
    prior: &Prior,
    trainset: &LabeledSet,
    eps: f64,
    teacher: &TeacherSpec,
    domain: &InputDomain,
    budget: EnumBudget,
    exec: &E,
) -> Result<Option<Ratio>> {
    let points = domain.enumerate()?;
    let catalog = FunctionCatalog::build(prior, &points, budget, exec)?;
    let reference = catalog.table_of(teacher)?;
    catalog.bad_volume(trainset, &reference, eps)
}

/// Row index of each trainset point within `points`; fails for points outside.
pub(crate) fn locate(points: &Points, set: &LabeledSet) -> Result<Vec<usize>> {
    let key = |r: &[f64]| r.iter().map(|v| v.to_bits()).collect::<Vec<u64>>();
    let index: BTreeMap<Vec<u64>, usize> = points.rows().enumerate().map(|(i, r)| (key(r), i)).collect();
    set.points()
        .rows()
        .map(|r| {
            index
                .get(&key(r))
                .copied()
                .ok_or_else(|| Error::InvalidDomain("training point outside the enumerated domain".into()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;
    use crate::quantnet::{Activation, FcArch};

    #[test]
    fn enumeration_order() {
        let arch: Architecture = FcArch::vanilla(&[1, 1]).unwrap().into();
        let grid = QuantGrid::integers(2).unwrap();
        let all: Vec<_> = enumerate_params(&arch, &grid, EnumBudget::default()).unwrap().collect();
        assert_eq!(all.len(), 4);
        assert_eq!(all[0].values(), &[-1.0, -1.0]);
        assert_eq!(all[1].values(), &[0.0, -1.0]);
        assert_eq!(all[3].values(), &[0.0, 0.0]);

        let arch: Architecture = FcArch::vanilla(&[1, 2, 1]).unwrap().into();
        let grid = QuantGrid::integers(3).unwrap();
        assert_eq!(enumerate_params(&arch, &grid, EnumBudget::default()).unwrap().len(), 2187);
        assert!(matches!(
            enumerate_params(&arch, &grid, EnumBudget::new(100)),
            Err(Error::BudgetExceeded { configs: 2187, budget: 100 })
        ));
    }

    #[test]
    fn digits_round_trip() {
        for i in [0u128, 1, 17, 2186] {
            assert_eq!(index_of(&digits_of(i, 3, 7), 3), i);
        }
    }

    #[test]
    fn scan_matches_iterator() {
        let arch: Architecture = FcArch::vanilla(&[1, 2, 1]).unwrap().into();
        let grid = QuantGrid::integers(3).unwrap();
        let prior = Prior::new(arch.clone(), grid.clone(), Activation::Relu).unwrap();
        let net = prior.network();
        let seen: Vec<Vec<f64>> = scan(&net, &grid, 2187, &Serial, Vec::new, |acc, _, _, p| acc.push(p.to_vec()))
            .into_iter()
            .flatten()
            .collect();
        let direct: Vec<Vec<f64>> =
            enumerate_params(&arch, &grid, EnumBudget::default()).unwrap().map(|p| p.into_values()).collect();
        assert_eq!(seen, direct);
    }
}
