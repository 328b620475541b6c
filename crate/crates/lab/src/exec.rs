//! Scoped-thread executor with the same results as the serial one.

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use typnet_core::exec::{blocks, Executor, Serial};

/// Indices handed to a worker at a time by `find_first`.
const CHUNK: u64 = 256;

#[derive(Debug, Clone, Copy)]
pub struct Threaded {
    workers: usize,
}

impl Threaded {
    pub fn new(workers: usize) -> Self {
        Self { workers: workers.max(1) }
    }

    /// One worker per available core.
    pub fn available() -> Self {
        Self::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

impl Default for Threaded {
    fn default() -> Self {
        Self::available()
    }
}

impl Executor for Threaded {
    fn workers(&self) -> usize {
        self.workers
    }

    fn find_first<S, I, F>(&self, range: Range<u64>, init: I, test: F) -> Option<u64>
    where
        I: Fn() -> S + Sync,
        F: Fn(&mut S, u64) -> bool + Sync,
    {
        if self.workers == 1 {
            return Serial.find_first(range, init, test);
        }
        // Chunks are claimed in increasing order, so once `best` is set every
        // smaller index has been claimed by someone who will finish checking it.
        let next = AtomicU64::new(range.start);
        let best = AtomicU64::new(u64::MAX);
        std::thread::scope(|s| {
            for _ in 0..self.workers {
                s.spawn(|| {
                    let mut state = init();
                    loop {
                        let start = next.fetch_add(CHUNK, Ordering::Relaxed);
                        if start >= range.end || start >= best.load(Ordering::Relaxed) {
                            break;
                        }
                        let end = (start + CHUNK).min(range.end);
                        for i in start..end {
                            if i >= best.load(Ordering::Relaxed) {
                                break;
                            }
                            if test(&mut state, i) {
                                best.fetch_min(i, Ordering::Relaxed);
                                break;
                            }
                        }
                    }
                });
            }
        });
        let b = best.into_inner();
        (b != u64::MAX).then_some(b)
    }

    fn map_blocks<T, S, I, F>(&self, n: u64, block: u64, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync,
        F: Fn(&mut S, Range<u64>) -> T + Sync,
    {
        let ranges: Vec<Range<u64>> = blocks(n, block).collect();
        if self.workers == 1 || ranges.len() <= 1 {
            return Serial.map_blocks(n, block, init, f);
        }
        let next = AtomicU64::new(0);
        let done = Mutex::new(Vec::with_capacity(ranges.len()));
        std::thread::scope(|s| {
            for _ in 0..self.workers.min(ranges.len()) {
                s.spawn(|| {
                    let mut state = init();
                    let mut local = Vec::new();
                    loop {
                        let b = next.fetch_add(1, Ordering::Relaxed) as usize;
                        if b >= ranges.len() {
                            break;
                        }
                        local.push((b, f(&mut state, ranges[b].clone())));
                    }
                    done.lock().unwrap().extend(local);
                });
            }
        });
        let mut done = done.into_inner().unwrap();
        done.sort_by_key(|(b, _)| *b);
        done.into_iter().map(|(_, t)| t).collect()
    }
}
