mod common;

use common::rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::FRAC_PI_2;
use typnet_core::bounds::margin_gamma;
use typnet_core::contnet::*;
use typnet_core::teacher::Points;

fn gaussian(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(r)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Random orthogonal matrix by Gram–Schmidt on Gaussian rows.
fn rotation(r: &mut ChaCha8Rng, d: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < d {
        let mut v = gaussian(r, d);
        // Two passes keep the basis orthogonal to rounding.
        for _ in 0..2 {
            for u in &q {
                let c = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 {
            q.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    q
}

fn apply(rot: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    rot.iter().map(|row| dot(row, x)).collect()
}

fn rotate_rows(rot: &[Vec<f64>], flat: &[f64], d: usize) -> Vec<f64> {
    flat.chunks_exact(d).flat_map(|x| apply(rot, x)).collect()
}

#[test]
fn margins_are_rotation_invariant() {
    let mut r = rng(1);
    let (d0, d1, s, n) = (6, 12, 3, 40);
    for _ in 0..100 {
        let t = sample_cont_prior(d0, s, 0.1, &mut r).unwrap();
        let pts = Points::new(d0, gaussian(&mut r, n * d0)).unwrap();
        let rot = rotation(&mut r, d0);
        let t2 = ContTwoLayer::new(d0, rotate_rows(&rot, t.weights(), d0), t.z().to_vec(), 0.1).unwrap();
        let p2 = Points::new(d0, rotate_rows(&rot, pts.as_flat(), d0)).unwrap();
        let a = margins(&pts, &t, d1, 0.1).unwrap();
        let b = margins(&p2, &t2, d1, 0.1).unwrap();
        assert!((a.alpha - b.alpha).abs() < 1e-9);
        assert!((a.beta - b.beta).abs() < 1e-9);
    }
}

#[test]
fn gamma_limits() {
    for &a in &[0.1, 0.5, 1.0, 1.4] {
        assert!(margin_gamma(a, a + 1e-6).unwrap() < 1e-2);
        let top = margin_gamma(a, FRAC_PI_2 - 1e-6).unwrap();
        assert!((top - FRAC_PI_2).abs() < 1e-5, "{top}");
    }
}

#[test]
fn rows_inside_the_cone_match_activations() {
    let mut r = rng(2);
    let (d0, s, n) = (5, 3, 25);
    for _ in 0..1000 {
        let t = sample_cont_prior(d0, s, 0.0, &mut r).unwrap();
        let pts = Points::new(d0, gaussian(&mut r, n * d0)).unwrap();
        let (alpha, _) = first_layer_margin(&pts, &t).unwrap();
        assert!(alpha > 0.0);
        let mut student = Vec::new();
        for i in 0..s {
            let w = t.row(i);
            let mut u = gaussian(&mut r, d0);
            let c = dot(&u, w);
            u.iter_mut().zip(w).for_each(|(a, b)| *a -= c * b);
            let nu = dot(&u, &u).sqrt();
            let theta = r.random_range(0.0..alpha) * 0.999;
            student.extend(w.iter().zip(&u).map(|(a, b)| theta.cos() * a + theta.sin() * b / nu));
        }
        assert!(activation_match_check(&student, t.weights(), &pts, s));
    }
}

#[test]
fn spherical_prior_is_centered() {
    let mut r = rng(3);
    let d0 = 10;
    let mut mean = vec![0.0; d0];
    let draws = 10_000;
    for _ in 0..draws {
        let t = sample_cont_prior(d0, 1, 0.0, &mut r).unwrap();
        mean.iter_mut().zip(t.row(0)).for_each(|(m, w)| *m += w / draws as f64);
        assert!((dot(t.row(0), t.row(0)) - 1.0).abs() < 1e-12);
    }
    assert!(dot(&mean, &mean).sqrt() <= 0.05);
}

#[test]
fn experiment_is_seed_deterministic() {
    let cfg = MarginConfig { d0: 8, d1: 40, d1_star: 4, rho: 0.01, n: 200, trials: 6 };
    let a = margin_density_experiment(&cfg, 9, &typnet_core::exec::Serial).unwrap();
    let b = margin_density_experiment(&cfg, 9, &typnet_core::exec::Serial).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.trials.len(), 6);
    assert!(a.trials.iter().all(|t| t.alpha > 0.0 && t.log_ratio.is_some()));
}
