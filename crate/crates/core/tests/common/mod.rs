#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use typnet_core::quantnet::{Architecture, ConvArch, ConvFlavor, FcArch, FcFlavor, QuantGrid, QuantParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small integers so every forward pass is exact in f64.
pub fn int_vec(rng: &mut ChaCha8Rng, n: usize, lo: i32, hi: i32) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..=hi) as f64).collect()
}

pub fn random_params(arch: &Architecture, rng: &mut ChaCha8Rng) -> QuantParams {
    QuantParams::from_values(arch, int_vec(rng, arch.param_count(), -2, 2)).unwrap()
}

pub fn grid_params(arch: &Architecture, grid: &QuantGrid, rng: &mut ChaCha8Rng) -> QuantParams {
    let mut v = vec![0.0; arch.param_count()];
    grid.fill_uniform(rng, &mut v);
    QuantParams::from_values(arch, v).unwrap()
}

/// Widths `d_0..d_L` with `d_L = 1`.
pub fn random_fc_widths(rng: &mut ChaCha8Rng, max_depth: usize, max_width: usize) -> Vec<usize> {
    let depth = rng.random_range(1..=max_depth);
    let mut w = vec![rng.random_range(1..=max_width)];
    for _ in 1..depth {
        w.push(rng.random_range(1..=max_width));
    }
    w.push(1);
    w
}

/// A teacher/student pair of FC widths with `d*_l <= d_l`, sharing `d_0` and `d_L`.
pub fn random_fc_pair(rng: &mut ChaCha8Rng, max_depth: usize, max_width: usize) -> (Vec<usize>, Vec<usize>) {
    let student = random_fc_widths(rng, max_depth, max_width);
    let mut teacher = student.clone();
    let last = teacher.len() - 1;
    for w in &mut teacher[1..last] {
        *w = rng.random_range(1..=*w);
    }
    (teacher, student)
}

pub fn fc(widths: &[usize], scaled: bool) -> Architecture {
    let flavor = if scaled { FcFlavor::Scaled } else { FcFlavor::Vanilla };
    FcArch::new(widths.to_vec(), flavor).unwrap().into()
}

pub fn conv(kernels: &[usize], channels: &[usize], len: usize, scaled: bool) -> Architecture {
    let flavor = if scaled { ConvFlavor::Scaled } else { ConvFlavor::Plain };
    ConvArch::new(kernels.to_vec(), channels.to_vec(), len, flavor).unwrap().into()
}

/// Teacher/student conv pair sharing kernels, `c_0` and input length.
pub fn random_conv_pair(rng: &mut ChaCha8Rng, scaled: bool) -> (Architecture, Architecture) {
    let depth = rng.random_range(1..=2);
    let kernels: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=3)).collect();
    let len = kernels.iter().sum::<usize>() - depth + rng.random_range(1..=3);
    let mut student = vec![rng.random_range(1..=2)];
    for _ in 0..depth {
        student.push(rng.random_range(1..=3));
    }
    let mut teacher = student.clone();
    for c in &mut teacher[1..] {
        *c = rng.random_range(1..=*c);
    }
    (conv(&kernels, &teacher, len, scaled), conv(&kernels, &student, len, scaled))
}
