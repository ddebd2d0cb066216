use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClusterResult, Provenance};
use crate::datasets::Dataset;
use crate::density::DensityVector;
use crate::error::{Error, Result};
use crate::metrics::{bcubed_scores, pairwise_scores, Scores};
use crate::neighbors::euclidean;

/// Per-point DPC quantities. Density ties are broken by index, lower index
/// ranking higher, so exactly one point (the global peak) has no higher
/// neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct DpcState {
    pub density: DensityVector,
    /// Distance to the nearest higher-ranked point; the peak gets the largest
    /// pairwise distance in the data.
    pub delta: Vec<f64>,
    /// Nearest higher-ranked point, `None` for the peak.
    pub nn_higher: Vec<Option<usize>>,
    pub gamma: Vec<f64>,
    /// Point indices by decreasing density.
    order: Vec<usize>,
}

impl DpcState {
    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn peak(&self) -> usize {
        self.order[0]
    }

    pub fn density_order(&self) -> &[usize] {
        &self.order
    }

    fn gamma_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.gamma[b].total_cmp(&self.gamma[a]).then(a.cmp(&b)));
        idx
    }
}

fn by_density(rho: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| rho[b].total_cmp(&rho[a]).then(a.cmp(&b))
}

pub fn dpc_state(density: &DensityVector, ds: &Dataset) -> Result<DpcState> {
    let n = ds.len();
    Error::check_len("density", density.len(), n)?;
    let rho = &density.values;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(by_density(rho));

    let nearest: Vec<(f64, Option<usize>)> = (0..n)
        .into_par_iter()
        .map(|rank| {
            let i = order[rank];
            let x = ds.row(i);
            order[..rank]
                .iter()
                .map(|&j| (euclidean(x, ds.row(j)), j))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map_or((f64::NAN, None), |(d, j)| (d, Some(j)))
        })
        .collect();

    let max_dist = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| euclidean(ds.row(i), ds.row(j)))
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    let mut delta = vec![0.0; n];
    let mut nn_higher = vec![None; n];
    for (rank, (d, j)) in nearest.into_iter().enumerate() {
        let i = order[rank];
        delta[i] = if j.is_some() { d } else { max_dist };
        nn_higher[i] = j;
    }
    let gamma = rho.iter().zip(&delta).map(|(r, d)| r * d).collect();
    Ok(DpcState {
        density: density.clone(),
        delta,
        nn_higher,
        gamma,
        order,
    })
}

fn assign(state: &DpcState, centers: &[usize], algorithm: &str, param: (&str, f64)) -> ClusterResult {
    let n = state.len();
    let mut labels = vec![-1i64; n];
    for (l, &c) in centers.iter().enumerate() {
        labels[c] = l as i64;
    }
    for &i in &state.order {
        if labels[i] < 0 {
            let parent = state.nn_higher[i].expect("only the peak lacks a higher neighbor, and it is a center");
            labels[i] = labels[parent];
        }
    }
    let mut params = state.density.params.clone();
    params.insert(param.0.to_string(), param.1);
    ClusterResult {
        labels,
        num_clusters: centers.len(),
        provenance: Provenance {
            algorithm: algorithm.to_string(),
            density: state.density.kind.as_str().to_string(),
            params,
        },
    }
}

/// Picks the `c` points of largest `gamma` (ties by index) as centers,
/// labeled `0..c` in that order, and lets every other point inherit the label
/// of its nearest higher-density point. The density peak is always a center;
/// in the degenerate case where it falls outside the top `c` it displaces the
/// last one.
pub fn dpc_cluster(state: &DpcState, c: usize) -> Result<ClusterResult> {
    let n = state.len();
    if c == 0 || c > n {
        return Err(Error::param("c", format!("must satisfy 1 <= c <= n = {n}, got {c}")));
    }
    let ranked = state.gamma_order();
    let mut centers: Vec<usize> = ranked[..c].to_vec();
    let peak = state.peak();
    if !centers.contains(&peak) {
        centers[c - 1] = peak;
        let pos: Vec<usize> = {
            let mut rank = vec![0; n];
            for (r, &i) in ranked.iter().enumerate() {
                rank[i] = r;
            }
            rank
        };
        centers.sort_by_key(|&i| pos[i]);
    }
    Ok(assign(state, &centers, "dpc", ("c", c as f64)))
}

/// Threshold variant: every point with `gamma >= tau` is a center, plus the
/// density peak.
pub fn dpc_cluster_threshold(state: &DpcState, tau: f64) -> ClusterResult {
    let peak = state.peak();
    let centers: Vec<usize> = state
        .gamma_order()
        .into_iter()
        .filter(|&i| state.gamma[i] >= tau || i == peak)
        .collect();
    assign(state, &centers, "dpc-threshold", ("tau", tau))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub c: usize,
    pub pairwise: Scores,
    pub bcubed: Scores,
}

/// Runs [`dpc_cluster`] for every `c` in the grid and scores each result
/// against `truth`. Points are reported in grid order, as computed.
pub fn pr_curve(state: &DpcState, truth: &[usize], c_grid: &[usize]) -> Result<Vec<PrPoint>> {
    if c_grid.is_empty() {
        return Err(Error::param("c_grid", "must not be empty"));
    }
    c_grid
        .iter()
        .map(|&c| {
            let r = dpc_cluster(state, c)?;
            Ok(PrPoint {
                c,
                pairwise: pairwise_scores(&r.labels, truth)?,
                bcubed: bcubed_scores(&r.labels, truth)?,
            })
        })
        .collect()
}
