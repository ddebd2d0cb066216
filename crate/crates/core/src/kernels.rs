//! Truncated bivariate kernels evaluated on a neighbor graph.
//!
//! * indicator-ball: `1` on the closed ε-ball (self included)
//! * symmetric-gaussian: `exp(-|x-y|^2 / h)` on the closed ε-ball
//! * asymmetric-gaussian: `exp(-|x-y|^2 / h)` on the k nearest other points
//!
//! Entries are only stored for graph edges. Gaussian values are clamped from
//! below at [`KERNEL_FLOOR`] so row supports always equal the graph lists.

use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::neighbors::{build_eps_graph, build_knn_graph, GraphMode, NeighborGraph};
use crate::sparse::Csr;

pub const KERNEL_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelSpec {
    IndicatorBall { eps: f64 },
    SymmetricGaussian { eps: f64, h: f64 },
    AsymmetricGaussian { k: usize, h: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive, got {v}")))
            }
        };
        match *self {
            KernelSpec::IndicatorBall { eps } => positive("eps", eps),
            KernelSpec::SymmetricGaussian { eps, h } => positive("eps", eps).and(positive("h", h)),
            KernelSpec::AsymmetricGaussian { k, h } => {
                if k == 0 {
                    return Err(Error::param("k", "must be at least 1"));
                }
                positive("h", h)
            }
        }
    }

    /// Graph the kernel is truncated to.
    pub fn graph_mode(&self) -> GraphMode {
        match *self {
            KernelSpec::IndicatorBall { eps } | KernelSpec::SymmetricGaussian { eps, .. } => GraphMode::EpsBall { eps },
            KernelSpec::AsymmetricGaussian { k, .. } => GraphMode::Knn { k },
        }
    }

    fn bandwidth(&self) -> Option<f64> {
        match *self {
            KernelSpec::IndicatorBall { .. } => None,
            KernelSpec::SymmetricGaussian { h, .. } | KernelSpec::AsymmetricGaussian { h, .. } => Some(h),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseKernel {
    spec: KernelSpec,
    matrix: Csr,
}

impl SparseKernel {
    pub fn spec(&self) -> KernelSpec {
        self.spec
    }

    pub fn matrix(&self) -> &Csr {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> SparseKernel {
        SparseKernel {
            spec: self.spec,
            matrix: self.matrix.map_values(|_, _, v| v * factor),
        }
    }

    /// Wraps an arbitrary nonnegative matrix, e.g. for tests on hand-built
    /// chains. Zero entries are dropped.
    pub fn from_rows(spec: KernelSpec, rows: Vec<Vec<(usize, f64)>>) -> Result<SparseKernel> {
        let n = rows.len();
        let mut kept = Vec::with_capacity(n);
        for row in rows {
            let mut r = Vec::with_capacity(row.len());
            for (j, v) in row {
                if j >= n {
                    return Err(Error::IndexOutOfRange { index: j, len: n });
                }
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::param(
                        "kernel",
                        format!("entries must be finite and >= 0, got {v}"),
                    ));
                }
                if v > 0.0 {
                    r.push((j, v));
                }
            }
            kept.push(r);
        }
        Ok(SparseKernel {
            spec,
            matrix: Csr::from_rows(kept),
        })
    }
}

pub fn kernel_matrix(ds: &Dataset, spec: &KernelSpec) -> Result<SparseKernel> {
    spec.validate()?;
    let graph = match spec.graph_mode() {
        GraphMode::EpsBall { eps } => build_eps_graph(ds, eps)?,
        GraphMode::Knn { k } => build_knn_graph(ds, k)?,
    };
    kernel_on_graph(&graph, spec)
}

/// Evaluates `spec` on the edges of an already built graph, which must be of
/// the kind and size the spec asks for.
pub fn kernel_on_graph(graph: &NeighborGraph, spec: &KernelSpec) -> Result<SparseKernel> {
    spec.validate()?;
    if graph.mode() != spec.graph_mode() {
        return Err(Error::param(
            "graph",
            format!("kernel needs {:?}, got {:?}", spec.graph_mode(), graph.mode()),
        ));
    }
    let h = spec.bandwidth();
    let rows = graph
        .lists()
        .iter()
        .map(|list| {
            list.iter()
                .map(|nb| {
                    let v = match h {
                        None => 1.0,
                        Some(h) => (-(nb.dist * nb.dist) / h).exp().max(KERNEL_FLOOR),
                    };
                    (nb.index, v)
                })
                .collect()
        })
        .collect();
    Ok(SparseKernel {
        spec: *spec,
        matrix: Csr::from_rows(rows),
    })
}

/// True iff every stored `(i, j, v)` has a stored `(j, i, v')` with
/// `|v - v'| <= 1e-12`.
pub fn is_symmetric(kmat: &SparseKernel) -> bool {
    let m = &kmat.matrix;
    (0..m.n()).all(|i| {
        m.iter_row(i)
            .all(|(j, v)| m.get(j, i).is_some_and(|back| (back - v).abs() <= 1e-12))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighbors::euclidean;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> Dataset {
        Dataset::new("line", xs.iter().map(|&x| vec![x]).collect(), None).unwrap()
    }

    #[test]
    fn two_point_symmetric_gaussian() {
        let ds = line(&[0.0, 1.0]);
        let k = kernel_matrix(&ds, &KernelSpec::SymmetricGaussian { eps: 2.0, h: 0.5 }).unwrap();
        let m = k.matrix();
        assert_eq!(m.get(0, 0), Some(1.0));
        assert_eq!(m.get(1, 1), Some(1.0));
        assert_abs_diff_eq!(m.get(0, 1).unwrap(), (-2.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(0, 1).unwrap(), 0.1353352832366127, epsilon = 1e-15);
        assert!(is_symmetric(&k));
    }

    #[test]
    fn zero_distance_is_one() {
        let ds = line(&[3.0, 3.0, 9.0]);
        let k = kernel_matrix(&ds, &KernelSpec::AsymmetricGaussian { k: 1, h: 0.5 }).unwrap();
        assert_eq!(k.matrix().get(0, 1), Some(1.0));
        assert_eq!(k.matrix().get(1, 0), Some(1.0));
    }

    #[test]
    fn isolated_indicator_is_identity() {
        let ds = line(&[0.0, 1.0, 2.0]);
        let k = kernel_matrix(&ds, &KernelSpec::IndicatorBall { eps: 0.5 }).unwrap();
        assert_eq!(k.nnz(), 3);
        for i in 0..3 {
            assert_eq!(k.matrix().get(i, i), Some(1.0));
        }
        assert!(is_symmetric(&k));
    }

    #[test]
    fn asymmetric_detected() {
        // 0 -> 1, 1 -> 0, 2 -> 1 under k = 1: the 2 -> 1 edge has no mirror
        let ds = line(&[0.0, 1.0, 2.5]);
        let k = kernel_matrix(&ds, &KernelSpec::AsymmetricGaussian { k: 1, h: 0.5 }).unwrap();
        assert!(!is_symmetric(&k));
        assert!((0..3).all(|i| k.matrix().row(i).0.len() == 1));
    }

    #[test]
    fn floor_clamps_tiny_values() {
        let ds = line(&[0.0, 100.0]);
        let k = kernel_matrix(&ds, &KernelSpec::SymmetricGaussian { eps: 200.0, h: 0.5 }).unwrap();
        assert_eq!(k.matrix().get(0, 1), Some(KERNEL_FLOOR));
    }

    #[test]
    fn invalid_specs() {
        let ds = line(&[0.0, 1.0]);
        assert!(kernel_matrix(&ds, &KernelSpec::SymmetricGaussian { eps: 1.0, h: 0.0 }).is_err());
        assert!(kernel_matrix(&ds, &KernelSpec::IndicatorBall { eps: -1.0 }).is_err());
        assert!(kernel_matrix(&ds, &KernelSpec::AsymmetricGaussian { k: 0, h: 0.5 }).is_err());
        assert!(kernel_matrix(&ds, &KernelSpec::AsymmetricGaussian { k: 2, h: 0.5 }).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn symmetric_gaussian_is_product_of_parts(
            rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 2..40),
            eps in 0.2f64..2.0,
            h in 0.1f64..2.0,
            k in 1usize..4,
        ) {
            let ds = Dataset::new("p", rows, None).unwrap();
            let n = ds.len();
            let sym = kernel_matrix(&ds, &KernelSpec::SymmetricGaussian { eps, h }).unwrap();
            prop_assert!(is_symmetric(&sym));
            for i in 0..n {
                for j in 0..n {
                    let dist = euclidean(ds.row(i), ds.row(j));
                    let gauss = (-(dist * dist) / h).exp().max(KERNEL_FLOOR);
                    let indicator = if dist <= eps { 1.0 } else { 0.0 };
                    let expect = gauss * indicator;
                    prop_assert_eq!(sym.matrix().get(i, j).unwrap_or(0.0), expect);
                }
            }
            prop_assert!(sym.matrix().values().iter().all(|&v| v > 0.0 && v <= 1.0));
            if k < n {
                let asym = kernel_matrix(&ds, &KernelSpec::AsymmetricGaussian { k, h }).unwrap();
                prop_assert!((0..n).all(|i| asym.matrix().row(i).0.len() == k));
                prop_assert!(asym.matrix().values().iter().all(|&v| v > 0.0 && v <= 1.0));
            }
        }
    }
}
