//! Density peaks (DPC) and density-generalized DBSCAN on top of any
//! [`DensityVector`](crate::density::DensityVector).

mod dbscan;
mod dpc;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

pub use dbscan::dbscan_cluster;
pub use dpc::{dpc_cluster, dpc_cluster_threshold, dpc_state, pr_curve, DpcState, PrPoint};

/// Label reserved for points that belong to no cluster.
pub const NOISE: i64 = -1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub algorithm: String,
    pub density: String,
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub labels: Vec<i64>,
    pub num_clusters: usize,
    pub provenance: Provenance,
}

impl ClusterResult {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    /// Non-noise labels are exactly `0..num_clusters`, each used at least once.
    pub fn labels_contiguous(&self) -> bool {
        let mut seen = vec![false; self.num_clusters];
        for &l in &self.labels {
            match usize::try_from(l) {
                Ok(l) if l < self.num_clusters => seen[l] = true,
                _ if l == NOISE => {}
                _ => return false,
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `index,label` rows with a header line.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "index,label")?;
        for (i, l) in self.labels.iter().enumerate() {
            writeln!(out, "{i},{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contiguity() {
        let mut r = ClusterResult {
            labels: vec![0, 1, NOISE, 1],
            num_clusters: 2,
            provenance: Provenance::default(),
        };
        assert!(r.labels_contiguous());
        assert_eq!(r.noise_count(), 1);
        r.num_clusters = 3;
        assert!(!r.labels_contiguous());
        r.labels[0] = 5;
        assert!(!r.labels_contiguous());
    }

    #[test]
    fn csv_and_json() {
        let r = ClusterResult {
            labels: vec![0, NOISE],
            num_clusters: 1,
            provenance: Provenance {
                algorithm: "dbscan".into(),
                density: "naive".into(),
                params: BTreeMap::from([("eps".to_string(), 0.5)]),
            },
        };
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,label\n0,0\n1,-1\n");
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"algorithm\":\"dbscan\""));
        let back: ClusterResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
