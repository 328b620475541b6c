use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{locate, scan, EnumBudget, Ratio};
use crate::exec::Executor;
use crate::sampler::Prior;
use crate::teacher::{LabeledSet, Points, TeacherSpec};
use crate::{Error, Result};

/// Labels of one function on an indexed point set, one bit per point
/// (set = `+1`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FunctionTable {
    bits: Vec<u64>,
    len: usize,
}

impl FunctionTable {
    pub fn from_labels(labels: &[i8]) -> Self {
        let mut t = Self::negative(labels.len());
        for (i, &y) in labels.iter().enumerate() {
            if y > 0 {
                t.set_positive(i);
            }
        }
        t
    }

    fn negative(len: usize) -> Self {
        Self { bits: alloc::vec![0; len.div_ceil(64)], len }
    }

    fn set_positive(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn label(&self, i: usize) -> i8 {
        if self.bits[i / 64] >> (i % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn labels(&self) -> Vec<i8> {
        (0..self.len).map(|i| self.label(i)).collect()
    }

    /// Number of points where the two tables differ.
    pub fn disagreements(&self, other: &FunctionTable) -> usize {
        self.bits.iter().zip(&other.bits).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    fn consistent(&self, idx: &[usize], labels: &[i8]) -> bool {
        idx.iter().zip(labels).all(|(&i, &y)| self.label(i) == y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    multiplicity: u64,
    first: u64,
}

/// One function in an exact posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorEntry {
    pub table: FunctionTable,
    pub multiplicity: u64,
    pub probability: f64,
}

/// Every function an architecture realizes on a fixed point set, with the
/// number of configurations realizing it. Built once, then queried for any
/// number of training sets drawn from the same points.
#[derive(Debug, Clone)]
pub struct FunctionCatalog {
    points: Points,
    tables: BTreeMap<FunctionTable, Entry>,
    total: u64,
}

impl FunctionCatalog {
    pub fn build<E: Executor>(prior: &Prior, points: &Points, budget: EnumBudget, exec: &E) -> Result<Self> {
        let net = prior.network();
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        net.check_input(points.row(0))?;
        let total = budget.check(prior.grid.len(), net.param_count())?;
        let n = points.len();
        let blocks = scan(
            &net,
            &prior.grid,
            total,
            exec,
            BTreeMap::new,
            |acc: &mut BTreeMap<FunctionTable, Entry>, ev, i, p| {
                let mut t = FunctionTable::negative(n);
                for (k, x) in points.rows().enumerate() {
                    if ev.label(p, x) > 0 {
                        t.set_positive(k);
                    }
                }
                acc.entry(t).and_modify(|e| e.multiplicity += 1).or_insert(Entry { multiplicity: 1, first: i });
            },
        );
        let mut tables = BTreeMap::new();
        for block in blocks {
            for (t, e) in block {
                tables.entry(t).and_modify(|x: &mut Entry| x.multiplicity += e.multiplicity).or_insert(e);
            }
        }
        Ok(Self { points: points.clone(), tables, total })
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    /// `Q^M`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct functions.
    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// `(table, multiplicity, smallest configuration index)` in table order.
    pub fn iter(&self) -> impl Iterator<Item = (&FunctionTable, u64, u64)> {
        self.tables.iter().map(|(t, e)| (t, e.multiplicity, e.first))
    }

    pub fn multiplicity(&self, table: &FunctionTable) -> u64 {
        self.tables.get(table).map_or(0, |e| e.multiplicity)
    }

    /// Teacher labels on the catalog points.
    pub fn table_of(&self, teacher: &TeacherSpec) -> Result<FunctionTable> {
        let set = teacher.label_points(&self.points)?;
        Ok(FunctionTable::from_labels(set.labels()))
    }

    /// Exact `p̃` when the catalog points are the full support.
    pub fn ptilde(&self, teacher: &TeacherSpec) -> Result<Ratio> {
        let t = self.table_of(teacher)?;
        Ok(Ratio { count: self.multiplicity(&t), total: self.total })
    }

    fn consistent<'s>(
        &'s self,
        trainset: &LabeledSet,
    ) -> Result<impl Iterator<Item = (&'s FunctionTable, &'s Entry)> + 's> {
        let idx = locate(&self.points, trainset)?;
        let labels = trainset.labels().to_vec();
        Ok(self.tables.iter().filter(move |(t, _)| t.consistent(&idx, &labels)))
    }

    pub fn phat(&self, trainset: &LabeledSet) -> Result<Ratio> {
        let count = self.consistent(trainset)?.map(|(_, e)| e.multiplicity).sum();
        Ok(Ratio { count, total: self.total })
    }

    /// `None` when no configuration interpolates.
    pub fn posterior(&self, trainset: &LabeledSet) -> Result<Option<Vec<PosteriorEntry>>> {
        let hits: Vec<_> = self.consistent(trainset)?.collect();
        let z: u64 = hits.iter().map(|(_, e)| e.multiplicity).sum();
        if z == 0 {
            return Ok(None);
        }
        Ok(Some(
            hits.into_iter()
                .map(|(t, e)| PosteriorEntry {
                    table: t.clone(),
                    multiplicity: e.multiplicity,
                    probability: e.multiplicity as f64 / z as f64,
                })
                .collect(),
        ))
    }

    /// Interpolating mass by number of disagreements with `reference`:
    /// `result[k]` configurations interpolate and differ on `k` points.
    pub fn error_profile(&self, trainset: &LabeledSet, reference: &FunctionTable) -> Result<Vec<u64>> {
        let mut profile = alloc::vec![0u64; self.points.len() + 1];
        for (t, e) in self.consistent(trainset)? {
            profile[t.disagreements(reference)] += e.multiplicity;
        }
        Ok(profile)
    }

    /// Exact posterior mass with population error at least `eps`, the
    /// catalog points carrying equal probability. `None` without interpolators.
    pub fn bad_volume(&self, trainset: &LabeledSet, reference: &FunctionTable, eps: f64) -> Result<Option<Ratio>> {
        let profile = self.error_profile(trainset, reference)?;
        Ok(bad_from_profile(&profile, eps))
    }
}

/// Bad-volume ratio from an [`FunctionCatalog::error_profile`].
pub fn bad_from_profile(profile: &[u64], eps: f64) -> Option<Ratio> {
    let n = profile.len() - 1;
    let total: u64 = profile.iter().sum();
    if total == 0 {
        return None;
    }
    let count = profile.iter().enumerate().filter(|&(k, _)| k as f64 / n as f64 >= eps).map(|(_, &c)| c).sum();
    Some(Ratio { count, total })
}
