mod common;

use common::*;
use proptest::prelude::*;
use typnet_core::bounds::pc_for;
use typnet_core::quantnet::*;
use typnet_core::teacher::*;

fn grid() -> QuantGrid {
    QuantGrid::integers(3).unwrap()
}

fn teacher_for(arch: &Architecture, seed: u64) -> TeacherSpec {
    let mut r = rng(seed);
    let params = grid_params(arch, &grid(), &mut r);
    TeacherSpec::new(arch.clone(), Activation::LeakyRelu(0.5), grid(), params).unwrap()
}

fn fc_pair(seed: u64, scaled: bool) -> (Architecture, Architecture) {
    let (t, s) = random_fc_pair(&mut rng(seed), 3, 4);
    (fc(&t, scaled), fc(&s, scaled))
}

/// Embeds with a random filler, checks outputs on Gaussian probes and the
/// constrained-entry count against the bound exponent.
fn check_embedding(tarch: &Architecture, sarch: &Architecture, seed: u64) -> Result<(), TestCaseError> {
    let teacher = teacher_for(tarch, seed);
    let mut r = rng(seed ^ 0x5eed);
    let filler = grid_params(sarch, &grid(), &mut r);
    let emb = embed_teacher(&teacher, sarch, Some(&filler)).unwrap();
    let student = Network::new(sarch.clone(), teacher.activation).unwrap();
    let tnet = teacher.network();
    let probes = InputDomain::gaussian(tarch.input_dim()).unwrap().sample(100, &mut r);
    for x in probes.rows() {
        prop_assert_eq!(student.forward(&emb.params, x).unwrap(), tnet.forward(&teacher.params, x).unwrap());
    }
    // The scaled-FC construction leaves the head without a scale to pin.
    let head = match sarch.kind() {
        ArchKind::ScaledFc => 1,
        _ => 0,
    };
    prop_assert_eq!(emb.constrained_count() + head, pc_for(tarch, sarch).unwrap());
    // Every free entry still holds the filler.
    for (i, &c) in emb.constrained.iter().enumerate() {
        if !c {
            prop_assert_eq!(emb.params.values()[i], filler.values()[i]);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn embedding_fc(seed in any::<u64>()) {
        let (t, s) = fc_pair(seed, false);
        check_embedding(&t, &s, seed)?;
    }

    #[test]
    fn embedding_sfc(seed in any::<u64>()) {
        let (t, s) = fc_pair(seed, true);
        check_embedding(&t, &s, seed)?;
    }

    #[test]
    fn embedding_cnn(seed in any::<u64>()) {
        let (t, s) = random_conv_pair(&mut rng(seed), false);
        check_embedding(&t, &s, seed)?;
    }

    #[test]
    fn embedding_scn(seed in any::<u64>()) {
        let (t, s) = random_conv_pair(&mut rng(seed), true);
        check_embedding(&t, &s, seed)?;
    }

    #[test]
    fn dataset_labels_match_teacher(seed in any::<u64>(), n in 1usize..50) {
        let (t, _) = fc_pair(seed, false);
        let teacher = teacher_for(&t, seed);
        let domain = InputDomain::gaussian(t.input_dim()).unwrap();
        let set = generate_dataset(&domain, &teacher, n, &mut rng(seed)).unwrap();
        let net = teacher.network();
        for (x, y) in set.iter() {
            let logit = net.forward(&teacher.params, x).unwrap().logit;
            prop_assert_eq!(y, if logit >= 0.0 { 1 } else { -1 });
        }
    }

    #[test]
    fn embedded_student_interpolates(seed in any::<u64>(), scaled in any::<bool>()) {
        let (t, s) = fc_pair(seed, scaled);
        let teacher = teacher_for(&t, seed);
        let domain = InputDomain::hypercube(t.input_dim()).unwrap();
        let set = generate_dataset(&domain, &teacher, 30, &mut rng(seed)).unwrap();
        let emb = embed_teacher(&teacher, &s, None).unwrap();
        let model = Model::new(Network::new(s, teacher.activation).unwrap(), emb.params).unwrap();
        prop_assert_eq!(empirical_error(&model, &set).unwrap(), 0.0);
        let verdict = is_teacher_equivalent(&model, &teacher.model(), &domain, TeMode::Exact, &mut rng(0)).unwrap();
        prop_assert_eq!(verdict, TeVerdict::Equivalent);
    }

    #[test]
    fn negated_teacher_is_refuted(seed in any::<u64>()) {
        let t = fc(&[3, 2, 1], false);
        let teacher = teacher_for(&t, seed);
        let domain = InputDomain::hypercube(3).unwrap();
        let corners = domain.enumerate().unwrap();
        let net = teacher.network();
        prop_assume!(corners.rows().any(|x| net.forward(&teacher.params, x).unwrap().logit != 0.0));
        let mut layers = teacher.params.fc_layers(t.as_fc().unwrap()).unwrap();
        let head = layers.last_mut().unwrap();
        head.weights.iter_mut().for_each(|w| *w = -*w);
        head.bias.iter_mut().for_each(|b| *b = -*b);
        let neg = QuantParams::from_fc_layers(t.as_fc().unwrap(), &layers).unwrap();
        let model = Model::new(net, neg).unwrap();
        let verdict = is_teacher_equivalent(&model, &teacher.model(), &domain, TeMode::Exact, &mut rng(0)).unwrap();
        prop_assert_eq!(verdict, TeVerdict::NotEquivalent);
    }
}

#[test]
fn mismatched_kinds_are_rejected() {
    let teacher = teacher_for(&fc(&[2, 1, 1], false), 1);
    assert!(embed_teacher(&teacher, &fc(&[2, 3, 1], true), None).is_err());
    assert!(embed_teacher(&teacher, &fc(&[2, 2, 1], false), None).is_ok());
    let wide = teacher_for(&fc(&[2, 3, 1], false), 1);
    assert!(matches!(
        embed_teacher(&wide, &fc(&[2, 2, 1], false), None),
        Err(typnet_core::Error::WidthViolation { .. })
    ));
}

#[test]
fn monte_carlo_error_interval() {
    // A coin-flip predictor against a constant teacher has error 1/2.
    let teacher = TeacherSpec::new(
        fc(&[1, 1], false),
        Activation::Relu,
        grid(),
        QuantParams::from_values(&fc(&[1, 1], false), vec![0.0, 1.0]).unwrap(),
    )
    .unwrap();
    let h = FnPredictor::new(1, |x: &[f64]| if x[0] >= 0.0 { 1 } else { -1 });
    let domain = InputDomain::gaussian(1).unwrap();
    let est = population_error(&h, &teacher.model(), &domain, ErrorMode::MonteCarlo { samples: 100_000 }, &mut rng(3))
        .unwrap();
    assert!(est.ci_high - est.ci_low <= 0.01 + 1e-12, "{est:?}");
    assert!(est.ci_low <= 0.5 && 0.5 <= est.ci_high);
}
