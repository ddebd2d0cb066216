//! Communicating-class structure of a transition matrix.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::TransitionMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedClass {
    /// Smallest point index in the class.
    pub witness: usize,
    pub size: usize,
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStructure {
    /// Number of strongly connected classes.
    pub classes: usize,
    /// Classes with no outgoing transition, i.e. the recurrent ones.
    pub closed: Vec<ClosedClass>,
}

impl ChainStructure {
    pub fn is_irreducible(&self) -> bool {
        self.classes == 1
    }

    pub fn periodic_class(&self) -> Option<&ClosedClass> {
        self.closed.iter().find(|c| c.period > 1)
    }

    /// A single aperiodic closed class; power iteration from any start
    /// reaches the same limit.
    pub fn has_unique_limit(&self) -> bool {
        self.closed.len() == 1 && self.closed[0].period == 1
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn chain_structure(p: &TransitionMatrix) -> ChainStructure {
    let m = p.matrix();
    let n = m.n();
    let mut g = DiGraph::<(), ()>::with_capacity(n, m.nnz());
    for _ in 0..n {
        g.add_node(());
    }
    for i in 0..n {
        for (j, v) in m.iter_row(i) {
            if v > 0.0 {
                g.add_edge(NodeIndex::new(i), NodeIndex::new(j), ());
            }
        }
    }
    let sccs = tarjan_scc(&g);
    let mut comp = vec![0usize; n];
    for (c, members) in sccs.iter().enumerate() {
        for v in members {
            comp[v.index()] = c;
        }
    }

    let mut level = vec![usize::MAX; n];
    let mut closed = Vec::new();
    for (c, members) in sccs.iter().enumerate() {
        let is_closed = members
            .iter()
            .all(|v| m.iter_row(v.index()).all(|(j, w)| w == 0.0 || comp[j] == c));
        if !is_closed {
            continue;
        }
        // BFS levels inside the class; the period is the gcd of
        // level[u] + 1 - level[v] over the class's edges.
        let root = members.iter().map(|v| v.index()).min().expect("nonempty class");
        level[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        let mut period = 0usize;
        while let Some(u) = queue.pop_front() {
            for (v, w) in m.iter_row(u) {
                if w == 0.0 {
                    continue;
                }
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                } else {
                    period = gcd(period, (level[u] + 1).abs_diff(level[v]));
                }
            }
        }
        closed.push(ClosedClass {
            witness: root,
            size: members.len(),
            period: period.max(1),
        });
    }
    closed.sort_by_key(|c| c.witness);
    ChainStructure {
        classes: sccs.len(),
        closed,
    }
}
