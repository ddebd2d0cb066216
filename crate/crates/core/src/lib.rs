//! Density-based clustering with kernel diffusion densities.
//!
//! A bivariate kernel truncated to an ε-ball or a kNN neighborhood is
//! row-normalized into a random walk on the data. Its stationary distribution
//! (`kd`) and the cheap column-sum surrogate (`fkd`) replace the usual
//! ball-count density inside DPC and DBSCAN.
//!
//! ```
//! use kdiff::prelude::*;
//!
//! let ds = Dataset::new("toy", vec![vec![0.0], vec![0.1], vec![0.2], vec![5.0], vec![5.1]], Some(vec![0, 0, 0, 1, 1]))?;
//! let kernel = kernel_matrix(&ds, &KernelSpec::AsymmetricGaussian { k: 1, h: 0.5 })?;
//! let p = build_transition(&kernel)?;
//! let rho = density_fkd(&p);
//! let labels = dpc_cluster(&dpc_state(&rho, &ds)?, 2)?;
//! assert_eq!(pairwise_scores(&labels.labels, ds.labels().unwrap())?.f, 1.0);
//! # Ok::<(), kdiff::Error>(())
//! ```

pub mod clustering;
pub mod datasets;
pub mod density;
mod error;
pub mod kernels;
pub mod metrics;
pub mod neighbors;
pub mod sparse;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::clustering::{
        dbscan_cluster, dpc_cluster, dpc_cluster_threshold, dpc_state, pr_curve, ClusterResult, DpcState, NOISE,
    };
    pub use crate::datasets::{load_dataset, sample_gmm, standardize, Dataset, GmmComponent, GmmSpec, LabelColumn};
    pub use crate::density::{
        build_transition, density_fkd, density_fkd_streaming, density_kd, density_lc, density_naive, fkd_cluster_mean,
        stationary_exact, DensityKind, DensityVector, KdOptions, TransitionMatrix,
    };
    pub use crate::kernels::{is_symmetric, kernel_matrix, kernel_on_graph, KernelSpec, SparseKernel};
    pub use crate::metrics::{bcubed_scores, evaluate, pairwise_scores, EvalReport, Scores};
    pub use crate::neighbors::{build_eps_graph, build_knn_graph, pairwise_distance, NeighborGraph};
    pub use crate::Error;
}
