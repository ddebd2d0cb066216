//! Exact kd-tree over the rows of a [`Dataset`].
//!
//! Distances handed back are always recomputed with [`euclidean`], so the
//! tree only decides which pairs get looked at. Plane pruning carries a small
//! relative slack so that rounding in the bound can never discard a pair the
//! brute-force scan would keep.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{euclidean, Neighbor};
use crate::datasets::Dataset;

const LEAF_SIZE: usize = 16;
const PRUNE_SLACK: f64 = 1e-12;

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

pub(crate) struct KdTree<'a> {
    ds: &'a Dataset,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// Max-heap entry ordered by (distance, index).
#[derive(Clone, Copy)]
struct Candidate(Neighbor);

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp_dist_index(&other.0)
    }
}

impl<'a> KdTree<'a> {
    pub(crate) fn new(ds: &'a Dataset) -> Self {
        let mut tree = KdTree {
            ds,
            order: (0..ds.len()).collect(),
            nodes: Vec::new(),
        };
        tree.build(0, ds.len());
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let ds = self.ds;
        let axis = (0..ds.dim())
            .map(|a| {
                let (lo, hi) = self.order[start..end]
                    .iter()
                    .map(|&i| ds.row(i)[a])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                (a, hi - lo)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map_or(0, |(a, _)| a);
        let mid = start + (end - start) / 2;
        self.order[start..end]
            .select_nth_unstable_by(mid - start, |&i, &j| ds.row(i)[axis].total_cmp(&ds.row(j)[axis]));
        let value = ds.row(self.order[mid])[axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// All points within `eps` (inclusive) of point `query`, including itself.
    pub(crate) fn within(&self, query: usize, eps: f64) -> Vec<Neighbor> {
        let q = self.ds.row(query);
        let bound = eps * (1.0 + PRUNE_SLACK);
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf { start, end } => {
                    for &j in &self.order[start..end] {
                        let dist = euclidean(q, self.ds.row(j));
                        if dist <= eps {
                            out.push(Neighbor { index: j, dist });
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    // left holds coordinates <= value, right holds >= value
                    let diff = q[axis] - value;
                    if diff <= bound {
                        stack.push(left);
                    }
                    if -diff <= bound {
                        stack.push(right);
                    }
                }
            }
        }
        out.sort_unstable_by_key(|nb| nb.index);
        out
    }

    /// The `k` nearest other points of `query`, ordered by (distance, index).
    pub(crate) fn nearest(&self, query: usize, k: usize) -> Vec<Neighbor> {
        let q = self.ds.row(query);
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        self.descend(0, q, query, k, &mut heap);
        let mut out: Vec<Neighbor> = heap.into_iter().map(|c| c.0).collect();
        out.sort_unstable_by(Neighbor::cmp_dist_index);
        out
    }

    fn descend(&self, id: usize, q: &[f64], query: usize, k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &j in &self.order[start..end] {
                    if j == query {
                        continue;
                    }
                    let cand = Candidate(Neighbor {
                        index: j,
                        dist: euclidean(q, self.ds.row(j)),
                    });
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().expect("k >= 1") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.descend(near, q, query, k, heap);
                let worst = heap.peek().map(|c| c.0.dist);
                let skip = heap.len() == k && worst.is_some_and(|w| diff.abs() > w * (1.0 + PRUNE_SLACK));
                if !skip {
                    self.descend(far, q, query, k, heap);
                }
            }
        }
    }
}
