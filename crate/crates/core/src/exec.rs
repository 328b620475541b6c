//! Work distribution with results that do not depend on scheduling.

use alloc::vec::Vec;
use core::ops::Range;

/// Runs index-addressed work. Implementations must return exactly what
/// [`Serial`] returns for the same inputs.
pub trait Executor: Sync {
    fn workers(&self) -> usize;

    /// Smallest `i` in `range` with `test(state, i)`, where each worker owns
    /// one `state` built by `init`.
    fn find_first<S, I, F>(&self, range: Range<u64>, init: I, test: F) -> Option<u64>
    where
        I: Fn() -> S + Sync,
        F: Fn(&mut S, u64) -> bool + Sync;

    /// Splits `0..n` into consecutive blocks of `block` indices and returns
    /// `f` of each block, in block order.
    fn map_blocks<T, S, I, F>(&self, n: u64, block: u64, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync,
        F: Fn(&mut S, Range<u64>) -> T + Sync;
}

/// Single-threaded reference executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn workers(&self) -> usize {
        1
    }

    fn find_first<S, I, F>(&self, range: Range<u64>, init: I, test: F) -> Option<u64>
    where
        I: Fn() -> S + Sync,
        F: Fn(&mut S, u64) -> bool + Sync,
    {
        let mut state = init();
        range.into_iter().find(|&i| test(&mut state, i))
    }

    fn map_blocks<T, S, I, F>(&self, n: u64, block: u64, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync,
        F: Fn(&mut S, Range<u64>) -> T + Sync,
    {
        let mut state = init();
        blocks(n, block).map(|r| f(&mut state, r)).collect()
    }
}

/// The block ranges `map_blocks` visits.
pub fn blocks(n: u64, block: u64) -> impl Iterator<Item = Range<u64>> {
    let block = block.max(1);
    (0..n.div_ceil(block)).map(move |b| b * block..((b + 1) * block).min(n))
}
