//! ε-ball and k-nearest-neighbor graphs under the Euclidean metric.
//!
//! Conventions pinned here and relied on downstream:
//! * ε-ball lists include the point itself at distance 0 and use the closed
//!   ball (`dist <= eps`); lists are sorted by neighbor index.
//! * kNN lists exclude the point itself and hold exactly `k` entries sorted by
//!   (distance, index), so ties at the k-th distance keep the lower index.

mod kdtree;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use kdtree::KdTree;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist: f64,
}

impl Neighbor {
    pub fn cmp_dist_index(&self, other: &Self) -> Ordering {
        self.dist.total_cmp(&other.dist).then(self.index.cmp(&other.index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphMode {
    EpsBall { eps: f64 },
    Knn { k: usize },
}

/// How neighbor lists are searched. Both paths return identical graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Search {
    BruteForce,
    KdTree,
    /// kd-tree in low dimension, brute force otherwise.
    #[default]
    Auto,
}

impl Search {
    fn use_tree(self, d: usize) -> bool {
        match self {
            Search::BruteForce => false,
            Search::KdTree => true,
            Search::Auto => d <= 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    mode: GraphMode,
    adjacency: Vec<Vec<Neighbor>>,
}

impl NeighborGraph {
    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[Neighbor] {
        &self.adjacency[i]
    }

    pub fn lists(&self) -> &[Vec<Neighbor>] {
        &self.adjacency
    }

    /// Total number of stored directed edges.
    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency.iter().enumerate().all(|(i, list)| {
            list.iter().all(|nb| {
                self.adjacency[nb.index]
                    .iter()
                    .any(|back| back.index == i && back.dist == nb.dist)
            })
        })
    }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn pairwise_distance(ds: &Dataset, i: usize, j: usize) -> Result<f64> {
    for index in [i, j] {
        if index >= ds.len() {
            return Err(Error::IndexOutOfRange { index, len: ds.len() });
        }
    }
    Ok(euclidean(ds.row(i), ds.row(j)))
}

pub fn build_eps_graph(ds: &Dataset, eps: f64) -> Result<NeighborGraph> {
    build_eps_graph_with(ds, eps, Search::Auto)
}

pub fn build_eps_graph_with(ds: &Dataset, eps: f64, search: Search) -> Result<NeighborGraph> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    let adjacency = if search.use_tree(ds.dim()) {
        let tree = KdTree::new(ds);
        (0..ds.len()).into_par_iter().map(|i| tree.within(i, eps)).collect()
    } else {
        (0..ds.len())
            .into_par_iter()
            .map(|i| {
                let q = ds.row(i);
                ds.rows()
                    .enumerate()
                    .filter_map(|(j, r)| {
                        let dist = euclidean(q, r);
                        (dist <= eps).then_some(Neighbor { index: j, dist })
                    })
                    .collect()
            })
            .collect()
    };
    Ok(NeighborGraph {
        mode: GraphMode::EpsBall { eps },
        adjacency,
    })
}

pub fn build_knn_graph(ds: &Dataset, k: usize) -> Result<NeighborGraph> {
    build_knn_graph_with(ds, k, Search::Auto)
}

pub fn build_knn_graph_with(ds: &Dataset, k: usize, search: Search) -> Result<NeighborGraph> {
    if k == 0 || k >= ds.len() {
        return Err(Error::param(
            "k",
            format!("must satisfy 1 <= k <= n - 1 = {}, got {k}", ds.len().saturating_sub(1)),
        ));
    }
    let adjacency = if search.use_tree(ds.dim()) {
        let tree = KdTree::new(ds);
        (0..ds.len()).into_par_iter().map(|i| tree.nearest(i, k)).collect()
    } else {
        (0..ds.len())
            .into_par_iter()
            .map(|i| {
                let q = ds.row(i);
                let mut all: Vec<Neighbor> = ds
                    .rows()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(j, r)| Neighbor {
                        index: j,
                        dist: euclidean(q, r),
                    })
                    .collect();
                all.select_nth_unstable_by(k - 1, Neighbor::cmp_dist_index);
                all.truncate(k);
                all.sort_unstable_by(Neighbor::cmp_dist_index);
                all
            })
            .collect()
    };
    Ok(NeighborGraph {
        mode: GraphMode::Knn { k },
        adjacency,
    })
}
