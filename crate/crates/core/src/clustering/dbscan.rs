use super::{ClusterResult, Provenance, NOISE};
use crate::density::DensityVector;
use crate::error::{Error, Result};
use crate::neighbors::{GraphMode, Neighbor, NeighborGraph};

/// DBSCAN with the core test `density >= core_threshold`.
///
/// Clusters are the connected components of the core points under ε-ball
/// adjacency, numbered by their smallest member index. A non-core point with
/// at least one core neighbor joins the cluster of its nearest core neighbor
/// (lower index on ties); all others are noise. With raw ball counts as the
/// density and `core_threshold = MinPts` this is classic DBSCAN.
pub fn dbscan_cluster(density: &DensityVector, graph: &NeighborGraph, core_threshold: f64) -> Result<ClusterResult> {
    let GraphMode::EpsBall { eps } = graph.mode() else {
        return Err(Error::param("graph", "DBSCAN needs an eps-ball graph"));
    };
    let n = graph.len();
    Error::check_len("density", density.len(), n)?;
    let core: Vec<bool> = density.values.iter().map(|&v| v >= core_threshold).collect();

    let mut labels = vec![NOISE; n];
    let mut next = 0i64;
    let mut stack = Vec::new();
    for seed in 0..n {
        if !core[seed] || labels[seed] != NOISE {
            continue;
        }
        labels[seed] = next;
        stack.push(seed);
        while let Some(u) = stack.pop() {
            for nb in graph.neighbors(u) {
                if core[nb.index] && labels[nb.index] == NOISE {
                    labels[nb.index] = next;
                    stack.push(nb.index);
                }
            }
        }
        next += 1;
    }

    for i in (0..n).filter(|&i| !core[i]) {
        labels[i] = graph
            .neighbors(i)
            .iter()
            .filter(|nb| core[nb.index])
            .min_by(|a, b| Neighbor::cmp_dist_index(a, b))
            .map_or(NOISE, |nb| labels[nb.index]);
    }

    let mut params = density.params.clone();
    params.insert("eps".into(), eps);
    params.insert("core_threshold".into(), core_threshold);
    Ok(ClusterResult {
        labels,
        num_clusters: next as usize,
        provenance: Provenance {
            algorithm: "dbscan".into(),
            density: density.kind.as_str().into(),
            params,
        },
    })
}
