use typnet::formats::{read_labeled_set, write_labeled_set, SetMeta};
use typnet::instance::{bound_check_instances, tiny_fc_line};
use typnet::studies::*;
use typnet::Threaded;
use typnet_core::oracle::EnumBudget;
use typnet_core::rng::Streams;
use typnet_core::sampler::DEFAULT_MAX_DRAWS;
use typnet_core::teacher::{generate_dataset, InputDomain};

#[test]
fn bound_check_rows_are_consistent() {
    let cfg = OracleVsBoundConfig {
        instances: bound_check_instances(),
        teachers: 2,
        budget: EnumBudget::default().max_configs,
    };
    let rows = oracle_vs_bound(&cfg, &Threaded::new(2)).unwrap();
    assert_eq!(rows.len(), 16);
    for r in &rows {
        assert!(r.m <= 12 && (r.q == 2 || r.q == 3));
        assert_eq!(r.total, (r.q as u64).pow(r.m as u32));
        assert!((r.p_tilde - r.p_tilde_count as f64 / r.total as f64).abs() < 1e-15);
        assert!((r.bound - (r.q as f64).powi(-(r.pc as i32))).abs() < 1e-15);
        assert!(r.pass && r.p_tilde >= r.bound);
    }
    let table = bound_check_table(&rows);
    assert_eq!(table.rows.len(), rows.len());
    assert_eq!(table.column("pass").unwrap(), vec!["true"; 16]);
    assert_eq!(table.column("provenance").unwrap()[0], "exact");
    let csv = String::from_utf8(table.to_bytes().unwrap()).unwrap();
    assert!(csv.starts_with("instance,kind,teacher_seed,M,Q,PC,"));
    assert!(csv.lines().nth(1).unwrap().starts_with("fc-121-q2,fc,0,7,2,5,3.1250000000000000e-2,"));
}

#[test]
fn noninterpolating_pac_meets_its_guarantee() {
    let cfg = PacConfig {
        instance: tiny_fc_line(),
        eps: 0.2,
        delta: 0.1,
        draws: 60,
        rule: PacRule::Noninterp { extra_units: 1, eps_star_max: 0.25 },
        n: None,
        max_draws: DEFAULT_MAX_DRAWS,
        budget: EnumBudget::default().max_configs,
    };
    let rep = pac_frequency_check(&cfg, 7, &Threaded::new(2)).unwrap();
    assert!(rep.eps_star > 0.0 && rep.eps_star <= 0.25);
    assert!((rep.target_error - (rep.eps_star + 0.4)).abs() < 1e-12);
    assert_eq!(rep.errors.len(), 60);
    assert!(rep.pass, "{rep:?}");
    assert_eq!(pac_table(&rep).rows.len(), 60);
}

#[test]
fn realizable_pac_and_volume_on_the_tiny_line() {
    let inst = tiny_fc_line();
    let budget = EnumBudget::default().max_configs;
    let pac = PacConfig {
        instance: inst.clone(),
        eps: 0.2,
        delta: 0.1,
        draws: 40,
        rule: PacRule::Lemma1,
        n: None,
        max_draws: DEFAULT_MAX_DRAWS,
        budget,
    };
    let rep = pac_frequency_check(&pac, 1, &Threaded::new(1)).unwrap();
    assert!(rep.pass && rep.errors.iter().all(|&e| (0.0..=1.0).contains(&e)));
    let vol = VolumeConfig { instance: inst, eps: 0.2, delta: 0.1, draws: 40, n: None, budget };
    let rep = volume_decay(&vol, 1, &Threaded::new(1)).unwrap();
    assert_eq!(rep.draws[0].sizes, [rep.n / 4, rep.n / 2, rep.n]);
    assert!(rep.pass_within_delta && rep.pass_nonincreasing);
    assert_eq!(volume_table(&rep).rows.len(), 40);
}

#[test]
fn width_sweep_reports_every_width() {
    let cfg = WidthSweepConfig {
        teacher: vec![2, 1, 1],
        widths: vec![1, 2, 4],
        scaled: true,
        q: 3,
        activation: None,
        domain: None,
        n_train: 15,
        samples: 30,
        reference: 2_000,
        max_draws: DEFAULT_MAX_DRAWS,
        teacher_seed: 3,
    };
    let rep = width_sweep(&cfg, 11, &Threaded::new(2)).unwrap();
    let widths: Vec<usize> = rep.results.iter().map(|r| r.width).collect();
    assert_eq!(widths, vec![1, 2, 4]);
    for r in &rep.results {
        assert_eq!(r.errors.len(), 30);
        assert!(r.mean_error >= 0.0 && r.mean_error <= 1.0 && r.mean_draws >= 1.0);
    }
    assert!(rep.results[0].params < rep.results[2].params);
    assert_eq!(width_table(&rep).rows.len(), 3);
}

#[test]
fn bundled_teacher_scale() {
    let rep = solve_teacher(&bundled_spec("resnet18").unwrap()).unwrap();
    assert!(rep.result.chat <= rep.result.budget);
    assert!(!rep.result.saturated);
    assert_eq!(rep.result.teacher_channels.len(), rep.spec.channels.len());
    assert!(bundled_spec("lenet").is_err());
}

#[test]
fn labeled_set_round_trip() {
    let inst = tiny_fc_line();
    let teacher = inst.teacher_spec().unwrap();
    let domain = InputDomain::gaussian(1).unwrap();
    let set = generate_dataset(&domain, &teacher, 25, &mut Streams::new(4).stream(0)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.csv");
    let meta = SetMeta { domain: domain.clone(), seed: Some(4), n: set.len(), dim: 1, teacher: Some(teacher.clone()) };
    write_labeled_set(&path, &set, &meta).unwrap();
    let (back, m) = read_labeled_set(&path).unwrap();
    assert_eq!(back, set);
    assert_eq!(m.teacher.unwrap(), teacher);
    assert_eq!(m.n, 25);
}
