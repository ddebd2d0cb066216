mod common;

use std::collections::{BTreeMap, VecDeque};

use common::{dist, random_dataset};
use kdiff::clustering::{dbscan_cluster, NOISE};
use kdiff::datasets::Dataset;
use kdiff::density::{DensityKind, DensityVector};
use kdiff::neighbors::build_eps_graph;

const UNSEEN: i64 = -2;

fn region(ds: &Dataset, p: usize, eps: f64) -> Vec<usize> {
    (0..ds.len()).filter(|&q| dist(ds.row(p), ds.row(q)) <= eps).collect()
}

/// Textbook DBSCAN (seed-list expansion over brute-force region queries),
/// followed by moving each border point to the cluster of its nearest core
/// point, lower index first on ties.
fn reference_dbscan(ds: &Dataset, eps: f64, min_pts: usize) -> Vec<i64> {
    let n = ds.len();
    let mut labels = vec![UNSEEN; n];
    let mut cluster = -1;
    for p in 0..n {
        if labels[p] != UNSEEN {
            continue;
        }
        let neighbors = region(ds, p, eps);
        if neighbors.len() < min_pts {
            labels[p] = NOISE;
            continue;
        }
        cluster += 1;
        labels[p] = cluster;
        let mut seeds: VecDeque<usize> = neighbors.into_iter().filter(|&q| q != p).collect();
        while let Some(q) = seeds.pop_front() {
            if labels[q] == NOISE {
                labels[q] = cluster;
            }
            if labels[q] != UNSEEN {
                continue;
            }
            labels[q] = cluster;
            let nq = region(ds, q, eps);
            if nq.len() >= min_pts {
                seeds.extend(nq);
            }
        }
    }
    let is_core: Vec<bool> = (0..n).map(|p| region(ds, p, eps).len() >= min_pts).collect();
    let core_labels = labels.clone();
    for p in (0..n).filter(|&p| !is_core[p]) {
        let nearest = region(ds, p, eps).into_iter().filter(|&q| is_core[q]).min_by(|&a, &b| {
            dist(ds.row(p), ds.row(a))
                .total_cmp(&dist(ds.row(p), ds.row(b)))
                .then(a.cmp(&b))
        });
        labels[p] = nearest.map_or(NOISE, |q| core_labels[q]);
    }
    labels
}

/// Renumbers clusters by first appearance; noise stays noise.
fn canonical(labels: &[i64]) -> Vec<i64> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            if l < 0 {
                NOISE
            } else {
                let next = map.len() as i64;
                *map.entry(l).or_insert(next)
            }
        })
        .collect()
}

#[test]
fn count_density_dbscan_matches_reference() {
    for seed in 0..50u64 {
        let n = 30 + (seed as usize * 37) % 270;
        let d = 1 + seed as usize % 3;
        let ds = random_dataset(1000 + seed, n, d);
        let eps = 0.3 + 0.15 * (seed % 6) as f64;
        let min_pts = 2 + seed as usize % 7;

        let graph = build_eps_graph(&ds, eps).unwrap();
        let counts = DensityVector {
            values: graph.lists().iter().map(|l| l.len() as f64).collect(),
            kind: DensityKind::Naive,
            params: BTreeMap::new(),
        };
        let ours = dbscan_cluster(&counts, &graph, min_pts as f64).unwrap();
        let reference = reference_dbscan(&ds, eps, min_pts);
        assert_eq!(canonical(&ours.labels), canonical(&reference), "seed {seed}");
        assert!(ours.labels_contiguous());
    }
}
