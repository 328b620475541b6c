mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use typnet_core::bounds::*;
use typnet_core::contnet::phat_lower_bound_cont;

fn hidden(w: &[usize]) -> (usize, Vec<usize>) {
    (w[0], w[1..].to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn complexity_sandwich(seed in any::<u64>(), q in 2usize..6) {
        let (t, s) = random_fc_pair(&mut rng(seed), 4, 8);
        let (d0, tw) = hidden(&t);
        let (_, sw) = hidden(&s);
        let f = chat_fc(d0, &tw, &sw, q).unwrap();
        prop_assert!(complexity_fc(d0, &tw, q).unwrap() <= f + 1e-9);
        prop_assert!(f <= complexity_fc(d0, &sw, q).unwrap() + 1e-9);
        let g = chat_sfc(d0, &tw, &sw, q).unwrap();
        prop_assert!(complexity_sfc(d0, &tw, q).unwrap() <= g + 1e-9);
        prop_assert!(g <= complexity_sfc(d0, &sw, q).unwrap() + 1e-9);
    }

    #[test]
    fn complexity_monotone(seed in any::<u64>(), q in 2usize..6) {
        let mut r = rng(seed);
        let (t, s) = random_fc_pair(&mut r, 4, 8);
        let (d0, tw) = hidden(&t);
        let (_, sw) = hidden(&s);
        let base = (chat_fc(d0, &tw, &sw, q).unwrap(), chat_sfc(d0, &tw, &sw, q).unwrap());
        let l = r.random_range(0..sw.len());
        let mut wider = sw.clone();
        wider[l] += 1;
        prop_assert!(chat_fc(d0, &tw, &wider, q).unwrap() >= base.0);
        prop_assert!(chat_sfc(d0, &tw, &wider, q).unwrap() >= base.1);
        if tw[l] < sw[l] {
            let mut tw2 = tw.clone();
            tw2[l] += 1;
            prop_assert!(chat_fc(d0, &tw2, &sw, q).unwrap() >= base.0);
            prop_assert!(chat_sfc(d0, &tw2, &sw, q).unwrap() >= base.1);
        }
        prop_assert!(chat_fc(d0, &tw, &sw, q + 1).unwrap() >= base.0);
        prop_assert!(chat_sfc(d0, &tw, &sw, q + 1).unwrap() >= base.1);
    }

    #[test]
    fn sample_sizes_monotone(c in 0.7f64..200.0, eps in 0.01f64..0.45, delta in 0.001f64..0.19, de in 0.0f64..0.05, dc in 0.0f64..20.0) {
        let e2 = eps + de;
        for n in [n_lemma1, n_volume, n_noninterp, n_pacbayes_markov] {
            prop_assert!(n(c, e2, delta).unwrap() <= n(c, eps, delta).unwrap());
            prop_assert!(n(c + dc, eps, delta).unwrap() >= n(c, eps, delta).unwrap());
        }
        let r = |c: f64, e: f64| n_refined(c, e, delta / 2.0, delta / 2.0).unwrap();
        prop_assert!(r(c, e2) <= r(c, eps));
        prop_assert!(r(c + dc, eps) >= r(c, eps));
        prop_assert!(bad_volume_delta(c, eps, n_volume(c, eps, delta).unwrap()) <= delta * (1.0 + 1e-12));
    }

    #[test]
    fn refined_versus_lemma(c in 0.7f64..200.0, eps in 0.01f64..0.99, delta in 0.001f64..0.19) {
        // Both share the c/ε term; the refined one only trades the confidence terms.
        let refined = n_refined(c, eps, delta / 2.0, delta / 2.0).unwrap() as f64;
        let conf = ((2.0 / delta).ln() + 2.0 * (2.0 / delta).ln().ln()) / eps;
        prop_assert!((refined - (c / eps + conf)).abs() <= 1.0);
        prop_assert!(refined >= c / eps);
    }

    #[test]
    fn continuous_bound_in_log_space(
        d0 in 1usize..10_000, d1 in 1usize..2_000, frac in 0.0f64..1.0,
        a in 0.001f64..1.5, gap in 0.001f64..1.0,
    ) {
        let beta = (a + gap).min(1.5697);
        prop_assume!(a < beta);
        let s = 1 + ((d1 - 1) as f64 * frac) as usize;
        let v = phat_lower_bound_cont(a, beta, d0, d1, s).unwrap();
        prop_assert!(v.is_finite() && v <= 0.0, "{v}");
    }

    #[test]
    fn continuous_bound_grows_with_beta(
        d0 in 1usize..500, d1 in 2usize..200, a in 0.01f64..1.2, gap in 0.01f64..0.3, up in 1e-4f64..0.1,
    ) {
        let beta = a + gap;
        prop_assume!(beta + up < std::f64::consts::FRAC_PI_2);
        let s = 1 + d1 / 3;
        let lo = phat_lower_bound_cont(a, beta, d0, d1, s).unwrap();
        let hi = phat_lower_bound_cont(a, beta + up, d0, d1, s).unwrap();
        prop_assert!(hi > lo);
        // A one-unit second layer has no angular dependence.
        let flat = phat_lower_bound_cont(a, beta, d0, 1, 1).unwrap();
        prop_assert_eq!(flat, phat_lower_bound_cont(a, beta + up, d0, 1, 1).unwrap());
    }

    #[test]
    fn continuous_first_layer_factor_grows_with_alpha(
        d0 in 2usize..500, a in 0.01f64..1.2, up in 1e-4f64..0.3,
    ) {
        // With γ held fixed only the per-row cap factor moves.
        prop_assume!(a + up < std::f64::consts::FRAC_PI_2);
        prop_assert!(cap_log_mass(d0, a + up) > cap_log_mass(d0, a));
    }
}

#[test]
fn sparse_rule_grows_like_m_log_m() {
    let (a, b) = (chat_sparse(50, 3, 3).unwrap(), chat_sparse(500, 3, 3).unwrap());
    let ratio = b / a;
    assert!(ratio > 10.0 && ratio < 10.0 * (503f64.ln() / 53f64.ln()) * 1.01);
    let s = chat_sfc(10, &[10, 10, 1], &[100, 100, 1], 3).unwrap();
    assert!(sfc_beats_sparse(s, 221, 10, 3).unwrap());
}
