//! Guess & Check: rejection sampling from the uniform prior over quantized
//! parameters, accepting the first draw that (nearly) interpolates.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::exec::Executor;
use crate::quantnet::{Activation, Architecture, Evaluator, Network, QuantGrid, QuantParams};
use crate::rng::Streams;
use crate::stats::Proportion;
use crate::teacher::{ErrorMode, InputDomain, LabeledSet, ReferenceSet, TeMode, TeacherSpec};
use crate::{Error, Result};

pub const DEFAULT_MAX_DRAWS: u64 = 100_000_000;

/// Uniform prior over `grid^M` for one architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub arch: Architecture,
    pub grid: QuantGrid,
    pub activation: Activation,
}

impl Prior {
    pub fn new(arch: Architecture, grid: QuantGrid, activation: Activation) -> Result<Self> {
        activation.validate()?;
        Ok(Self { arch, grid, activation })
    }

    pub fn network(&self) -> Network {
        Network::new(self.arch.clone(), self.activation).expect("activation validated")
    }

    pub fn param_count(&self) -> usize {
        self.arch.param_count()
    }

    /// Draw `i` of the run seeded by `streams`.
    pub fn draw_into(&self, streams: &Streams, i: u64, out: &mut [f64]) {
        self.grid.fill_uniform(&mut streams.stream(i), out);
    }

    pub fn draw(&self, streams: &Streams, i: u64) -> QuantParams {
        let mut v = vec![0.0; self.param_count()];
        self.draw_into(streams, i, &mut v);
        QuantParams::from_values(&self.arch, v).expect("sized by arch")
    }
}

/// One Guess & Check run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GncTrace {
    /// 1-based index of the accepted draw.
    #[serde(rename = "T")]
    pub t: u64,
    pub params: QuantParams,
    pub train_error: f64,
    /// Draws consumed, equal to `t`.
    pub draws: u64,
    pub max_draws: u64,
    pub seed: u64,
    pub threshold: f64,
}

/// Training set in the form the acceptance test wants.
struct Acceptance<'a> {
    set: &'a LabeledSet,
    allowed: usize,
}

impl<'a> Acceptance<'a> {
    fn new(net: &Network, set: &'a LabeledSet, threshold: f64) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        net.check_input(set.points().row(0))?;
        if !(0.0..1.0).contains(&threshold) {
            return Err(Error::OutOfRange {
                bound: "gnc_threshold",
                param: "gamma",
                value: threshold,
                range: "[0, 1)",
            });
        }
        Ok(Self { set, allowed: allowed_mistakes(threshold, set.len()) })
    }

    #[inline]
    fn accepts(&self, ev: &mut Evaluator<'_>, p: &[f64]) -> bool {
        let mut wrong = 0;
        for (x, y) in self.set.iter() {
            if ev.label(p, x) != y {
                wrong += 1;
                if wrong > self.allowed {
                    return false;
                }
            }
        }
        true
    }

    fn mistakes(&self, ev: &mut Evaluator<'_>, p: &[f64]) -> usize {
        self.set.iter().filter(|(x, y)| ev.label(p, x) != *y).count()
    }
}

/// Largest mistake count with `count / n <= threshold`.
pub fn allowed_mistakes(threshold: f64, n: usize) -> usize {
    (threshold * n as f64 + 1e-9) as usize
}

/// First prior draw with zero training error.
pub fn gnc<E: Executor>(prior: &Prior, trainset: &LabeledSet, max_draws: u64, seed: u64, exec: &E) -> Result<GncTrace> {
    gnc_threshold(prior, trainset, 0.0, max_draws, seed, exec)
}

/// First prior draw with training error at most `gamma`.
pub fn gnc_threshold<E: Executor>(
    prior: &Prior,
    trainset: &LabeledSet,
    gamma: f64,
    max_draws: u64,
    seed: u64,
    exec: &E,
) -> Result<GncTrace> {
    if max_draws == 0 {
        return Err(Error::BudgetExhausted { draws: 0 });
    }
    let net = prior.network();
    let acc = Acceptance::new(&net, trainset, gamma)?;
    let streams = Streams::new(seed);
    let m = prior.param_count();
    let hit = exec.find_first(
        0..max_draws,
        || (net.evaluator(), vec![0.0; m]),
        |(ev, buf), i| {
            prior.draw_into(&streams, i, buf);
            acc.accepts(ev, buf)
        },
    );
    let i = hit.ok_or(Error::BudgetExhausted { draws: max_draws })?;
    let params = prior.draw(&streams, i);
    let wrong = acc.mistakes(&mut net.evaluator(), params.values());
    Ok(GncTrace {
        t: i + 1,
        params,
        train_error: wrong as f64 / trainset.len() as f64,
        draws: i + 1,
        max_draws,
        seed,
        threshold: gamma,
    })
}

/// Seed of run `r` in a batch of independent runs.
pub fn run_seed(seed: u64, r: u64) -> u64 {
    Streams::new(seed).child(r).seed()
}

/// `runs` independent Guess & Check runs, run `r` seeded by `run_seed(seed, r)`.
/// Parallelism is across runs; each run is serial.
pub fn gnc_many<E: Executor>(
    prior: &Prior,
    trainset: &LabeledSet,
    gamma: f64,
    runs: u64,
    max_draws: u64,
    seed: u64,
    exec: &E,
) -> Result<Vec<GncTrace>> {
    let net = prior.network();
    let acc = Acceptance::new(&net, trainset, gamma)?;
    let m = prior.param_count();
    let per_block = exec.map_blocks(
        runs,
        8,
        || (net.evaluator(), vec![0.0; m]),
        |(ev, buf), range| {
            let mut out = Vec::with_capacity((range.end - range.start) as usize);
            for r in range {
                let s = run_seed(seed, r);
                let streams = Streams::new(s);
                let hit = (0..max_draws).find(|&i| {
                    prior.draw_into(&streams, i, buf);
                    acc.accepts(ev, buf)
                });
                out.push(hit.map(|i| {
                    prior.draw_into(&streams, i, buf);
                    let wrong = acc.mistakes(ev, buf);
                    GncTrace {
                        t: i + 1,
                        params: QuantParams::from_values(&prior.arch, buf.clone()).unwrap(),
                        train_error: wrong as f64 / trainset.len() as f64,
                        draws: i + 1,
                        max_draws,
                        seed: s,
                        threshold: gamma,
                    }
                }));
            }
            out
        },
    );
    per_block.into_iter().flatten().map(|t| t.ok_or(Error::BudgetExhausted { draws: max_draws })).collect()
}

fn count_draws<E, F>(prior: &Prior, n_draws: u64, seed: u64, exec: &E, pred: F) -> u64
where
    E: Executor,
    F: Fn(&mut Evaluator<'_>, &[f64]) -> bool + Sync,
{
    let net = prior.network();
    let streams = Streams::new(seed);
    let m = prior.param_count();
    exec.map_blocks(
        n_draws,
        4096,
        || (net.evaluator(), vec![0.0; m]),
        |(ev, buf), range| {
            range
                .filter(|&i| {
                    prior.draw_into(&streams, i, buf);
                    pred(ev, buf)
                })
                .count() as u64
        },
    )
    .into_iter()
    .sum()
}

/// Fraction of `n_draws` prior draws that interpolate `trainset`, with a
/// 95% Clopper–Pearson interval. Uses the same draws as [`gnc`] for `seed`.
pub fn estimate_phat<E: Executor>(
    prior: &Prior,
    trainset: &LabeledSet,
    n_draws: u64,
    seed: u64,
    exec: &E,
) -> Result<Proportion> {
    if n_draws == 0 {
        return Err(Error::BudgetExhausted { draws: 0 });
    }
    let net = prior.network();
    let acc = Acceptance::new(&net, trainset, 0.0)?;
    let hits = count_draws(prior, n_draws, seed, exec, |ev, p| acc.accepts(ev, p));
    Ok(Proportion::new(hits, n_draws))
}

/// How teacher equivalence was decided for a draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TeCheck {
    ExactTe,
    /// Not refuted on a finite probe; biased upward.
    ProbeTe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtildeEstimate {
    #[serde(flatten)]
    pub proportion: Proportion,
    pub mode: TeCheck,
    pub probe_size: usize,
}

/// Fraction of prior draws equivalent to `teacher`: exact on enumerable
/// domains, or never refuted on a probe drawn from stream `"probe"` of `seed`.
pub fn estimate_ptilde<E: Executor>(
    prior: &Prior,
    teacher: &TeacherSpec,
    domain: &InputDomain,
    n_draws: u64,
    seed: u64,
    mode: TeMode,
    exec: &E,
) -> Result<PtildeEstimate> {
    if n_draws == 0 {
        return Err(Error::BudgetExhausted { draws: 0 });
    }
    let emode = match mode {
        TeMode::Exact => ErrorMode::Exact,
        TeMode::Probe { size } => ErrorMode::MonteCarlo { samples: size },
    };
    let mut prng = Streams::new(seed).named("probe").stream(0);
    let reference = ReferenceSet::new(teacher, domain, emode, &mut prng)?;
    let net = prior.network();
    let acc = Acceptance::new(&net, &reference.set, 0.0)?;
    let hits = count_draws(prior, n_draws, seed, exec, |ev, p| acc.accepts(ev, p));
    Ok(PtildeEstimate {
        proportion: Proportion::new(hits, n_draws),
        mode: if reference.exact { TeCheck::ExactTe } else { TeCheck::ProbeTe },
        probe_size: reference.len(),
    })
}

/// Posterior samples and their population errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadVolume {
    pub eps: f64,
    #[serde(flatten)]
    pub proportion: Proportion,
    /// Population error of each posterior sample, in run order.
    pub errors: Vec<f64>,
    pub exact_errors: bool,
}

impl BadVolume {
    /// Fraction of the same samples with error at least `eps`.
    pub fn at(&self, eps: f64) -> Proportion {
        let k = self.errors.iter().filter(|&&e| e >= eps).count() as u64;
        Proportion::new(k, self.errors.len() as u64)
    }
}

/// `P_{h ~ posterior}(L_D(h) >= eps)` from independent Guess & Check runs.
/// Population errors are exact on enumerable domains when `error_mode` is
/// exact, otherwise measured on one Monte-Carlo reference set.
#[allow(clippy::too_many_arguments)]
pub fn estimate_bad_volume<E: Executor>(
    prior: &Prior,
    trainset: &LabeledSet,
    eps: f64,
    n_samples: u64,
    teacher: &TeacherSpec,
    domain: &InputDomain,
    error_mode: ErrorMode,
    max_draws: u64,
    seed: u64,
    exec: &E,
) -> Result<BadVolume> {
    if n_samples == 0 {
        return Err(Error::EmptySet);
    }
    let streams = Streams::new(seed);
    let mut rrng = streams.named("reference").stream(0);
    let reference = ReferenceSet::new(teacher, domain, error_mode, &mut rrng)?;
    let traces = gnc_many(prior, trainset, 0.0, n_samples, max_draws, streams.named("posterior").seed(), exec)?;
    let net = prior.network();
    let mut ev = net.evaluator();
    let errors: Vec<f64> = traces.iter().map(|t| reference.error(&mut ev, t.params.values())).collect();
    let k = errors.iter().filter(|&&e| e >= eps).count() as u64;
    Ok(BadVolume { eps, proportion: Proportion::new(k, n_samples), errors, exact_errors: reference.exact })
}
