mod common;

use common::rng;
use kdiff::metrics::{bcubed_scores, pairwise_scores, Scores};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Enumerates every unordered pair.
fn brute_pairwise(pred: &[i64], truth: &[usize]) -> Scores {
    let same_pred = |i: usize, j: usize| pred[i] >= 0 && pred[i] == pred[j];
    let (mut tp, mut pp, mut tt) = (0u64, 0u64, 0u64);
    for i in 0..pred.len() {
        for j in i + 1..pred.len() {
            let (a, b) = (same_pred(i, j), truth[i] == truth[j]);
            tp += (a && b) as u64;
            pp += a as u64;
            tt += b as u64;
        }
    }
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Scores::new(ratio(tp, pp), ratio(tp, tt))
}

/// Per-point averages over explicit cluster memberships.
fn brute_bcubed(pred: &[i64], truth: &[usize]) -> Scores {
    let n = pred.len();
    let same_pred = |i: usize, j: usize| i == j || (pred[i] >= 0 && pred[i] == pred[j]);
    let (mut p, mut r) = (0.0, 0.0);
    for i in 0..n {
        let cluster: Vec<usize> = (0..n).filter(|&j| same_pred(i, j)).collect();
        let class: Vec<usize> = (0..n).filter(|&j| truth[i] == truth[j]).collect();
        let both = cluster.iter().filter(|&&j| truth[j] == truth[i]).count() as f64;
        p += both / cluster.len() as f64;
        r += both / class.len() as f64;
    }
    Scores::new(p / n as f64, r / n as f64)
}

fn random_labels(seed: u64, n: usize) -> (Vec<i64>, Vec<usize>) {
    let mut r = rng(seed);
    let kp = r.random_range(1..12);
    let kt = r.random_range(1..8);
    let pred = (0..n).map(|_| r.random_range(-1..kp)).collect();
    let truth = (0..n).map(|_| r.random_range(0..kt)).collect();
    (pred, truth)
}

#[test]
fn pairwise_matches_enumeration_up_to_500() {
    for (seed, n) in [(0, 1), (1, 2), (2, 17), (3, 100), (4, 333), (5, 500)] {
        let (pred, truth) = random_labels(seed, n);
        assert_eq!(
            pairwise_scores(&pred, &truth).unwrap(),
            brute_pairwise(&pred, &truth),
            "n = {n}"
        );
    }
}

#[test]
fn bcubed_matches_enumeration() {
    for (seed, n) in [(10, 1), (11, 9), (12, 120), (13, 500)] {
        let (pred, truth) = random_labels(seed, n);
        let fast = bcubed_scores(&pred, &truth).unwrap();
        let slow = brute_bcubed(&pred, &truth);
        assert!((fast.precision - slow.precision).abs() < 1e-12);
        assert!((fast.recall - slow.recall).abs() < 1e-12);
        assert!((fast.f - slow.f).abs() < 1e-12);
    }
}

#[test]
fn singleton_noise_counts_only_itself() {
    let truth = [0usize, 0, 1, 1];
    let pred = [0i64, -1, 1, -1];
    let b = bcubed_scores(&pred, &truth).unwrap();
    assert_eq!(b.precision, 1.0);
    assert_eq!(b.recall, 0.5);
    let pw = pairwise_scores(&pred, &truth).unwrap();
    assert_eq!((pw.precision, pw.recall), (0.0, 0.0));
}

proptest! {
    #[test]
    fn relabeling_clusters_changes_nothing(seed in 0u64..10_000, n in 1usize..200) {
        let (pred, truth) = random_labels(seed, n);
        let mut perm: Vec<i64> = (0..12).collect();
        perm.shuffle(&mut rng(seed + 1));
        let relabeled: Vec<i64> = pred.iter().map(|&l| if l < 0 { l } else { perm[l as usize] + 100 }).collect();
        let truth_perm: Vec<usize> = truth.iter().map(|&t| (t * 7 + 3) % 11 + 50).collect();
        prop_assert_eq!(pairwise_scores(&pred, &truth).unwrap(), pairwise_scores(&relabeled, &truth_perm).unwrap());
        prop_assert_eq!(bcubed_scores(&pred, &truth).unwrap(), bcubed_scores(&relabeled, &truth_perm).unwrap());
    }

    #[test]
    fn swapping_roles_swaps_precision_and_recall(seed in 0u64..10_000, n in 1usize..150) {
        let mut r = rng(seed);
        let a: Vec<usize> = (0..n).map(|_| r.random_range(0..6)).collect();
        let b: Vec<usize> = (0..n).map(|_| r.random_range(0..6)).collect();
        for f in [pairwise_scores::<usize, usize>, bcubed_scores::<usize, usize>] {
            let ab = f(&a, &b).unwrap();
            let ba = f(&b, &a).unwrap();
            prop_assert!((ab.precision - ba.recall).abs() < 1e-12);
            prop_assert!((ab.recall - ba.precision).abs() < 1e-12);
            prop_assert!((ab.f - ba.f).abs() < 1e-12);
        }
    }

    #[test]
    fn scores_stay_in_unit_interval(seed in 0u64..10_000, n in 0usize..120) {
        let (pred, truth) = random_labels(seed, n);
        for s in [pairwise_scores(&pred, &truth).unwrap(), bcubed_scores(&pred, &truth).unwrap()] {
            for v in [s.precision, s.recall, s.f] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
