#![allow(dead_code)]

use kdiff::datasets::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points in `d` dimensions around a few random centers.
pub fn random_dataset(seed: u64, n: usize, d: usize) -> Dataset {
    let mut r = rng(seed);
    let centers: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..d).map(|_| r.random_range(-4.0..4.0)).collect())
        .collect();
    let mut labels = Vec::with_capacity(n);
    let rows = (0..n)
        .map(|_| {
            let c = r.random_range(0..centers.len());
            labels.push(c);
            let spread = 0.3 + c as f64 * 0.4;
            centers[c]
                .iter()
                .map(|&m| m + spread * r.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    Dataset::new("random", rows, Some(labels)).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// All pairwise distances, computed directly.
pub fn distance_matrix(ds: &Dataset) -> Vec<Vec<f64>> {
    let n = ds.len();
    (0..n)
        .map(|i| (0..n).map(|j| dist(ds.row(i), ds.row(j))).collect())
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// `n` points uniform in the unit cube.
pub fn uniform_dataset(seed: u64, n: usize, d: usize) -> Dataset {
    let mut r = rng(seed);
    let rows = (0..n).map(|_| (0..d).map(|_| r.random::<f64>()).collect()).collect();
    Dataset::new("uniform", rows, None).unwrap()
}
