//! Pairwise and BCubed precision / recall / F-score.
//!
//! Noise labels (negative ids) are scored as singleton clusters. BCubed
//! values are unweighted means over points. A 0/0 ratio counts as 0.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterResult, Provenance};
use crate::error::{Error, Result};

/// A cluster id; `None` marks noise.
pub trait Label: Copy {
    fn cluster(self) -> Option<u64>;
}

impl Label for usize {
    fn cluster(self) -> Option<u64> {
        Some(self as u64)
    }
}

impl Label for i64 {
    fn cluster(self) -> Option<u64> {
        u64::try_from(self).ok()
    }
}

impl Label for i32 {
    fn cluster(self) -> Option<u64> {
        u64::try_from(self).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

impl Scores {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Scores { precision, recall, f }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Dense ids with every noise point given a fresh singleton id.
fn dense_ids<L: Label>(labels: &[L]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let mut next = 0usize;
    let ids = labels
        .iter()
        .map(|l| match l.cluster() {
            Some(c) => *map.entry(c).or_insert_with(|| {
                next += 1;
                next - 1
            }),
            None => {
                next += 1;
                next - 1
            }
        })
        .collect();
    (ids, next)
}

struct Contingency {
    n: usize,
    pred_sizes: Vec<u64>,
    truth_sizes: Vec<u64>,
    /// Ordered so float sums over cells do not depend on hashing.
    cells: BTreeMap<(usize, usize), u64>,
}

fn contingency<A: Label, B: Label>(pred: &[A], truth: &[B]) -> Result<Contingency> {
    Error::check_len("predicted labels", pred.len(), truth.len())?;
    let (p, np) = dense_ids(pred);
    let (t, nt) = dense_ids(truth);
    let mut pred_sizes = vec![0u64; np];
    let mut truth_sizes = vec![0u64; nt];
    let mut cells = BTreeMap::new();
    for (&a, &b) in p.iter().zip(&t) {
        pred_sizes[a] += 1;
        truth_sizes[b] += 1;
        *cells.entry((a, b)).or_insert(0u64) += 1;
    }
    Ok(Contingency {
        n: pred.len(),
        pred_sizes,
        truth_sizes,
        cells,
    })
}

fn pairs(m: u64) -> f64 {
    (m * m.saturating_sub(1) / 2) as f64
}

pub fn pairwise_scores<A: Label, B: Label>(pred: &[A], truth: &[B]) -> Result<Scores> {
    let c = contingency(pred, truth)?;
    let tp: f64 = c.cells.values().map(|&m| pairs(m)).sum();
    let pred_same: f64 = c.pred_sizes.iter().map(|&m| pairs(m)).sum();
    let truth_same: f64 = c.truth_sizes.iter().map(|&m| pairs(m)).sum();
    Ok(Scores::new(ratio(tp, pred_same), ratio(tp, truth_same)))
}

pub fn bcubed_scores<A: Label, B: Label>(pred: &[A], truth: &[B]) -> Result<Scores> {
    let c = contingency(pred, truth)?;
    if c.n == 0 {
        return Ok(Scores::default());
    }
    // each of the m points in cell (a, b) contributes m/|a| and m/|b|
    let (mut p, mut r) = (0.0, 0.0);
    for (&(a, b), &m) in &c.cells {
        let m2 = (m * m) as f64;
        p += m2 / c.pred_sizes[a] as f64;
        r += m2 / c.truth_sizes[b] as f64;
    }
    let n = c.n as f64;
    Ok(Scores::new(p / n, r / n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pairwise: Scores,
    pub bcubed: Scores,
    pub n: usize,
    pub provenance: Provenance,
}

pub fn evaluate<B: Label>(result: &ClusterResult, truth: &[B]) -> Result<EvalReport> {
    Ok(EvalReport {
        pairwise: pairwise_scores(&result.labels, truth)?,
        bcubed: bcubed_scores(&result.labels, truth)?,
        n: result.len(),
        provenance: result.provenance.clone(),
    })
}
