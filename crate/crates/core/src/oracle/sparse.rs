use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{index_of, EnumBudget};
use crate::quantnet::QuantParams;
use crate::sampler::Prior;
use crate::teacher::LabeledSet;
use crate::{Error, Result};

/// An interpolator of minimum support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sparsest {
    pub params: QuantParams,
    pub support: usize,
    /// Mixed-radix index of the configuration.
    pub index: u128,
}

/// Interpolating configuration with the fewest nonzero entries; ties go to
/// the smallest configuration index. Supports are searched in increasing
/// size and the search stops at the first size with a feasible point.
/// `None` when nothing interpolates.
pub fn sparsest_interpolator(prior: &Prior, trainset: &LabeledSet, budget: EnumBudget) -> Result<Option<Sparsest>> {
    let net = prior.network();
    if trainset.is_empty() {
        return Err(Error::EmptySet);
    }
    net.check_input(trainset.points().row(0))?;
    let grid = &prior.grid;
    let m = net.param_count();
    let q = grid.len();
    budget.check(q, m)?;
    let zero = grid.zero_index();
    let nonzero: Vec<usize> = (0..q).filter(|&d| d != zero).collect();
    let mut ev = net.evaluator();
    let mut digits = vec![zero; m];
    let mut values = vec![0.0; m];

    for s in 0..=m {
        let mut best: Option<u128> = None;
        let mut support: Vec<usize> = (0..s).collect();
        loop {
            // Every nonzero assignment on this support.
            let mut choice = vec![0usize; s];
            loop {
                for (k, &pos) in support.iter().enumerate() {
                    digits[pos] = nonzero[choice[k]];
                    values[pos] = grid.level(digits[pos]);
                }
                if trainset.iter().all(|(x, y)| ev.label(&values, x) == y) {
                    let idx = index_of(&digits, q);
                    if best.is_none_or(|b| idx < b) {
                        best = Some(idx);
                    }
                }
                if !advance(&mut choice, nonzero.len()) {
                    break;
                }
            }
            for &pos in &support {
                digits[pos] = zero;
                values[pos] = 0.0;
            }
            if !next_combination(&mut support, m) {
                break;
            }
        }
        if let Some(index) = best {
            let d = super::digits_of(index, q, m);
            let params = QuantParams::from_indices(grid, &d);
            return Ok(Some(Sparsest { params, support: s, index }));
        }
    }
    Ok(None)
}

fn advance(choice: &mut [usize], radix: usize) -> bool {
    for c in choice.iter_mut() {
        *c += 1;
        if *c < radix {
            return true;
        }
        *c = 0;
    }
    false
}

/// Next `k`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
