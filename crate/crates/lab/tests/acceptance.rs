//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a criterion outside `EXPECTED_FAIL` fails.
//!
//! `cargo test -p typnet --test acceptance -- 3 7` runs only criteria 3 and 7.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, LN_2, PI};
use std::time::Instant;

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use typnet::instance::{self, bound_check_instances, InstanceSpec};
use typnet::studies::*;
use typnet::Threaded;
use typnet_core::bounds::*;
use typnet_core::contnet::{margin_density_experiment, MarginConfig};
use typnet_core::exec::Executor;
use typnet_core::oracle::{exact_phat, exact_posterior, sparsest_interpolator, EnumBudget, FunctionTable};
use typnet_core::quantnet::*;
use typnet_core::rng::Streams;
use typnet_core::sampler::{gnc_many, DEFAULT_MAX_DRAWS};
use typnet_core::special::ln_beta;
use typnet_core::teacher::*;

/// Known not to reach its threshold at desk scale; see the README.
const EXPECTED_FAIL: &[u32] = &[8];

type Outcome = Result<(bool, String), String>;
type Criterion = (u32, &'static str, fn(&Threaded) -> Outcome);

fn main() {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let exec = Threaded::available();
    let criteria: [Criterion; 10] = [
        (1, "embedding functional equivalence", c1_embedding),
        (2, "bound vs exact oracle", c2_bound_vs_oracle),
        (3, "guess-and-check posterior and draw count", c3_gnc),
        (4, "realizable PAC frequency", c4_pac),
        (5, "bad-volume decay", c5_volume),
        (6, "narrow-teacher width insensitivity", c6_width),
        (7, "teacher scale for the ResNet-18 spec", c7_teacher_scale),
        (8, "angular margins beta > alpha (desk scale)", c8_margins),
        (9, "bound-formula regression", c9_regression),
        (10, "sparsest interpolator sanity", c10_sparsest),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = run(&exec).unwrap_or_else(|e| (false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        let tag = match (pass, EXPECTED_FAIL.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {tag}: {name}: {detail} [{secs:.1}s]");
        if !pass && !EXPECTED_FAIL.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// 1 ------------------------------------------------------------------------

fn fc_pair(rng: &mut impl Rng, scaled: bool) -> (Architecture, Architecture) {
    let depth = rng.random_range(1..=3);
    let mut student = vec![rng.random_range(1..=4)];
    for _ in 1..depth {
        student.push(rng.random_range(1..=5));
    }
    student.push(1);
    let mut teacher = student.clone();
    let last = teacher.len() - 1;
    for w in &mut teacher[1..last] {
        *w = rng.random_range(1..=*w);
    }
    let mk = if scaled { instance::sfc } else { instance::fc };
    (mk(&teacher), mk(&student))
}

fn conv_pair(rng: &mut impl Rng, scaled: bool) -> (Architecture, Architecture) {
    let depth = rng.random_range(1..=3);
    let kernels: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=3)).collect();
    let len = kernels.iter().sum::<usize>() - depth + rng.random_range(1..=4);
    let mut student = vec![rng.random_range(1..=3)];
    for _ in 0..depth {
        student.push(rng.random_range(1..=4));
    }
    let mut teacher = student.clone();
    for c in &mut teacher[1..] {
        *c = rng.random_range(1..=*c);
    }
    let mk = if scaled { instance::scn } else { instance::cnn };
    (mk(&kernels, &teacher, len), mk(&kernels, &student, len))
}

/// Probes on which the embedded student's logit differs bitwise from the teacher's.
fn embedding_mismatches(s: &Streams, kind: u64, probes: usize) -> Result<u64, String> {
    let mut rng = s.stream(0);
    let (tarch, sarch) = match kind {
        0 => fc_pair(&mut rng, false),
        1 => fc_pair(&mut rng, true),
        2 => conv_pair(&mut rng, false),
        _ => conv_pair(&mut rng, true),
    };
    let q = rng.random_range(2..=5);
    let grid = QuantGrid::integers(q).map_err(err)?;
    let act = if rng.random_bool(0.5) { Activation::Relu } else { Activation::LeakyRelu(0.25) };
    let mut tv = vec![0.0; tarch.param_count()];
    grid.fill_uniform(&mut rng, &mut tv);
    let mut fv = vec![0.0; sarch.param_count()];
    grid.fill_uniform(&mut rng, &mut fv);
    let teacher =
        TeacherSpec::new(tarch.clone(), act, grid, QuantParams::from_values(&tarch, tv).map_err(err)?).map_err(err)?;
    let filler = QuantParams::from_values(&sarch, fv).map_err(err)?;
    let emb = embed_teacher(&teacher, &sarch, Some(&filler)).map_err(err)?;
    let (tnet, snet) = (teacher.network(), Network::new(sarch.clone(), act).map_err(err)?);
    let (mut te, mut se) = (tnet.evaluator(), snet.evaluator());
    let points = InputDomain::gaussian(tarch.input_dim()).map_err(err)?.sample(probes, &mut rng);
    Ok(points
        .rows()
        .filter(|x| te.logit(teacher.params.values(), x).to_bits() != se.logit(emb.params.values(), x).to_bits())
        .count() as u64)
}

fn c1_embedding(exec: &Threaded) -> Outcome {
    let (triples, probes) = (10_000u64, 1_000);
    let root = Streams::new(0xe3b);
    let per_block = exec.map_blocks(
        triples,
        64,
        || (),
        |_, r| -> Result<u64, String> { r.map(|i| embedding_mismatches(&root.child(i), i % 4, probes)).sum() },
    );
    let mismatches: u64 = per_block.into_iter().sum::<Result<u64, String>>()?;
    Ok((mismatches == 0, format!("{triples} triples x {probes} probes, {mismatches} mismatches")))
}

// 2 ------------------------------------------------------------------------

fn c2_bound_vs_oracle(exec: &Threaded) -> Outcome {
    let cfg = OracleVsBoundConfig {
        instances: bound_check_instances(),
        teachers: 3,
        budget: EnumBudget::default().max_configs,
    };
    let rows = oracle_vs_bound(&cfg, exec).map_err(err)?;
    let names: std::collections::BTreeSet<_> = rows.iter().map(|r| r.instance.as_str()).collect();
    let kinds: std::collections::BTreeSet<_> = rows.iter().map(|r| r.kind.as_str()).collect();
    let failed = rows.iter().filter(|r| !r.pass).count();
    let worst = rows.iter().map(|r| r.p_tilde / r.bound).fold(f64::INFINITY, f64::min);
    let pass = failed == 0 && names.len() >= 5 && kinds.len() == 4;
    Ok((
        pass,
        format!(
            "{} instances, {} teachers, kinds {kinds:?}, {failed} violations, min p~/Q^-PC = {worst:.3}",
            names.len(),
            rows.len()
        ),
    ))
}

// 3 ------------------------------------------------------------------------

fn c3_gnc(exec: &Threaded) -> Outcome {
    let runs = 100_000u64;
    let inst = InstanceSpec::new(
        "gnc-check",
        instance::fc(&[2, 1, 1]),
        instance::fc(&[2, 2, 1]),
        3,
        InputDomain::hypercube(2).map_err(err)?,
    )
    .with_seed(5);
    let prior = inst.prior().map_err(err)?;
    let teacher = inst.teacher_spec().map_err(err)?;
    let full = generate_exhaustive(&inst.domain, &teacher).map_err(err)?;
    let train = teacher.label_points(&full.points().select(&[0, 3])).map_err(err)?;
    let budget = EnumBudget::default();
    let phat = exact_phat(&prior, &train, budget, exec).map_err(err)?.value();
    let post = exact_posterior(&prior, &train, full.points(), budget, exec).map_err(err)?.ok_or("no interpolator")?;
    let traces = gnc_many(&prior, &train, 0.0, runs, DEFAULT_MAX_DRAWS, 31, exec).map_err(err)?;

    let net = prior.network();
    let mut ev = net.evaluator();
    let mut observed: BTreeMap<FunctionTable, u64> = BTreeMap::new();
    for t in &traces {
        let labels: Vec<i8> = full.points().rows().map(|x| ev.label(t.params.values(), x)).collect();
        *observed.entry(FunctionTable::from_labels(&labels)).or_default() += 1;
    }
    let unexpected = observed.keys().filter(|k| !post.iter().any(|e| &e.table == *k)).count();

    // Bins with expected count below 5 are pooled.
    let r = runs as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for e in &post {
        let exp = e.probability * r;
        let obs = observed.get(&e.table).copied().unwrap_or(0) as f64;
        if exp >= 5.0 {
            bins.push((obs, exp));
        } else {
            pooled.0 += obs;
            pooled.1 += exp;
        }
    }
    if pooled.1 > 0.0 {
        if pooled.1 >= 5.0 || bins.is_empty() {
            bins.push(pooled);
        } else {
            let last = bins.iter_mut().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
            last.0 += pooled.0;
            last.1 += pooled.1;
        }
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = bins.len().saturating_sub(1).max(1) as f64;
    let p_value = ChiSquared::new(df).map_err(err)?.sf(stat);

    let mean_t = traces.iter().map(|t| t.t as f64).sum::<f64>() / r;
    let se = ((1.0 - phat) / (phat * phat)).sqrt() / r.sqrt();
    let z = (mean_t - 1.0 / phat) / se;
    let pass = unexpected == 0 && p_value > 0.01 && z.abs() <= 3.0;
    Ok((
        pass,
        format!(
            "{} functions, chi2 = {stat:.2} on {df} df, p = {p_value:.3}; mean T = {mean_t:.4} vs 1/p^ = {:.4} ({z:+.2} SE)",
            post.len(),
            1.0 / phat
        ),
    ))
}

// 4, 5 ---------------------------------------------------------------------

fn c4_pac(exec: &Threaded) -> Outcome {
    let cfg = PacConfig {
        instance: instance::tiny_fc_line(),
        eps: 0.2,
        delta: 0.1,
        draws: 200,
        rule: PacRule::Lemma1,
        n: None,
        max_draws: DEFAULT_MAX_DRAWS,
        budget: EnumBudget::default().max_configs,
    };
    let rep = pac_frequency_check(&cfg, 404, exec).map_err(err)?;
    Ok((
        rep.pass,
        format!(
            "N = {}, {}/{} draws with L_D <= 0.2, fraction {:.3} vs threshold {:.3}",
            rep.n, rep.successes, rep.draws, rep.fraction, rep.threshold
        ),
    ))
}

fn c5_volume(exec: &Threaded) -> Outcome {
    let cfg = VolumeConfig {
        instance: instance::tiny_fc_line(),
        eps: 0.2,
        delta: 0.1,
        draws: 200,
        n: None,
        budget: EnumBudget::default().max_configs,
    };
    let rep = volume_decay(&cfg, 505, exec).map_err(err)?;
    Ok((
        rep.pass_within_delta && rep.pass_nonincreasing,
        format!(
            "N = {}, bad volume <= delta in {:.3} (need 0.9), nonincreasing in {:.3} (need 0.9)",
            rep.n, rep.fraction_within_delta, rep.fraction_nonincreasing
        ),
    ))
}

// 6 ------------------------------------------------------------------------

fn c6_width(exec: &Threaded) -> Outcome {
    let cfg = WidthSweepConfig {
        teacher: vec![3, 1, 1],
        widths: vec![2, 4, 8],
        scaled: false,
        q: 3,
        activation: None,
        domain: None,
        n_train: 50,
        samples: 1_000,
        reference: 10_000,
        max_draws: DEFAULT_MAX_DRAWS,
        teacher_seed: 0,
    };
    let rep = width_sweep(&cfg, 606, exec).map_err(err)?;
    let mean = |w: usize| rep.results.iter().find(|r| r.width == w).map(|r| r.mean_error).ok_or("missing width");
    let gap = mean(8)? - mean(2)?;
    let ci = rep.results.iter().map(|r| r.max_sample_half_width).fold(0.0, f64::max);
    let means: Vec<String> = rep.results.iter().map(|r| format!("d1={}: {:.4}", r.width, r.mean_error)).collect();
    Ok((
        gap <= 0.05 && ci <= 0.01,
        format!("{}; gap {gap:+.4} (max 0.05), max CI half-width {ci:.4}", means.join(", ")),
    ))
}

// 7 ------------------------------------------------------------------------

fn c7_teacher_scale(_: &Threaded) -> Outcome {
    let rep = solve_teacher(&bundled_spec("resnet18").map_err(err)?).map_err(err)?;
    let (a, p) = (rep.result.alpha, rep.result.teacher_params as f64);
    let pass = (0.08..=0.17).contains(&a) && (120_500.0..=482_000.0).contains(&p);
    Ok((pass, format!("alpha = {a:.4} (target ~0.125), teacher params = {p} (target ~241k)")))
}

// 8 ------------------------------------------------------------------------

fn c8_margins(exec: &Threaded) -> Outcome {
    let rep = margin_density_experiment(&MarginConfig::DESK, 808, exec).map_err(err)?;
    let f = rep.fraction_beta_gt_alpha;
    Ok((f >= 0.9, format!("fraction with beta > alpha = {f:.2} over {} trials (need 0.9)", rep.trials.len())))
}

// 9 ------------------------------------------------------------------------

fn c9_regression(_: &Threaded) -> Outcome {
    let l3 = 3f64.ln();
    let l5 = 5f64.ln();
    let rel = |got: f64, want: f64| ((got - want) / want).abs();
    let g = margin_gamma(FRAC_PI_6, FRAC_PI_3).map_err(err)?;
    let floats: Vec<(&str, f64, f64, f64)> = vec![
        ("chat_fc 3;(2,1);(5,1);Q3", chat_fc(3, &[2, 1], &[5, 1], 3).map_err(err)?, 14.0 * l3, 1e-9),
        ("chat_fc equal widths", chat_fc(3, &[5, 1], &[5, 1], 3).map_err(err)?, 26.0 * l3, 1e-9),
        ("complexity_fc", complexity_fc(3, &[5, 1], 3).map_err(err)?, 26.0 * l3, 1e-9),
        ("chat_fc single unit", chat_fc(4, &[1], &[1], 2).map_err(err)?, 5.0 * LN_2, 1e-9),
        ("chat_sfc 3;(2,1);(5,1);Q3", chat_sfc(3, &[2, 1], &[5, 1], 3).map_err(err)?, 20.0 * l3, 1e-9),
        ("chat_sfc deep", chat_sfc(10, &[10, 10, 1], &[100, 100, 1], 5).map_err(err)?, 612.0 * l5, 1e-9),
        ("chat_fc deep", chat_fc(10, &[10, 10, 1], &[100, 100, 1], 5).map_err(err)?, 1221.0 * l5, 1e-9),
        ("chat_sfc single unit", chat_sfc(1, &[1], &[1], 2).map_err(err)?, 3.0 * LN_2, 1e-9),
        ("chat_cnn", chat_cnn(&[1, 1], &[1, 2], &[2], 4, 3).map_err(err)?, 8.0 * l3, 1e-9),
        ("chat_scn", chat_scn(&[1, 1], &[1, 2], &[2], 2, 3).map_err(err)?, 9.0 * l3, 1e-9),
        ("bad_volume_delta", bad_volume_delta(10.0, 0.1, 100), 2.0, 1e-9),
        (
            "eps_pscard",
            eps_pscard(2f64.powi(-20), 10_000, 0.05).map_err(err)?,
            (20.0 * LN_2 + 4.0 * 160f64.ln() + 2.0 * (20.0 * LN_2).ln()) / 1e4,
            1e-9,
        ),
        ("margin_gamma", g, (0.5 / FRAC_PI_6.cos()).acos(), 1e-9),
        ("B(1/2,1/2)", ln_beta(0.5, 0.5).exp(), PI, 1e-10),
        ("B(1/2,1)", ln_beta(0.5, 1.0).exp(), 2.0, 1e-10),
    ];
    let ints: Vec<(&str, u64, u64)> = vec![
        ("n_lemma1", n_lemma1(14.0 * l3, 0.1, 0.05).map_err(err)?, 265),
        ("n_volume", n_volume(10.0, 0.1, 0.05).map_err(err)?, 322),
        ("n_noninterp", n_noninterp(10.0, 0.1, 0.05).map_err(err)?, 1054),
        ("n_sparse", n_sparse(7, 1, 3, 0.1, 0.05).map_err(err)?, 398),
    ];
    let mut bad: Vec<String> = floats
        .iter()
        .filter(|(_, got, want, tol)| rel(*got, *want) > *tol)
        .map(|(n, got, want, _)| format!("{n}: {got} vs {want}"))
        .collect();
    bad.extend(ints.iter().filter(|(_, g, w)| g != w).map(|(n, g, w)| format!("{n}: {g} vs {w}")));
    let total = floats.len() + ints.len();
    if bad.is_empty() {
        Ok((true, format!("{total} examples reproduced")))
    } else {
        Ok((false, bad.join("; ")))
    }
}

// 10 -----------------------------------------------------------------------

fn c10_sparsest(_: &Threaded) -> Outcome {
    let names = ["fc-121-q3", "sfc-121-q3", "cnn-k2-q2"];
    let mut notes = Vec::new();
    let mut pass = true;
    for inst in bound_check_instances().into_iter().filter(|i| names.contains(&i.name.as_str())) {
        for seed in 0..3 {
            let inst = inst.clone().with_seed(seed);
            let prior = inst.prior().map_err(err)?;
            let teacher = inst.teacher_spec().map_err(err)?;
            let train = generate_exhaustive(&inst.domain, &teacher).map_err(err)?;
            let emb = embed_teacher(&teacher, &inst.student, None).map_err(err)?;
            let sp =
                sparsest_interpolator(&prior, &train, EnumBudget::default()).map_err(err)?.ok_or("no interpolator")?;
            let model = Model::new(prior.network(), sp.params.clone()).map_err(err)?;
            let train_err = empirical_error(&model, &train).map_err(err)?;
            let ok = sp.support <= emb.params.support() && train_err == 0.0;
            pass &= ok;
            if seed == 0 {
                notes.push(format!("{}: {} <= {}", inst.name, sp.support, emb.params.support()));
            }
        }
    }
    Ok((pass && notes.len() == 3, format!("support vs embedded teacher, 3 teachers each: {}", notes.join(", "))))
}
