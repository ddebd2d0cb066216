//! Density functions over a dataset.
//!
//! | kind  | definition                                                        |
//! |-------|-------------------------------------------------------------------|
//! | naive | `|B(x, eps) ∩ D| / (n eps^d V_d)`, self counted                    |
//! | lc    | `#{y in N_k(x) : naive(x) > naive(y)} / n`                        |
//! | kd    | stationary distribution of `P = D^-1 K`, from a uniform start     |
//! | fkd   | column sums of `P`                                                |
//!
//! The fkd vector is kept as raw column sums: its per-cluster mean is exactly
//! 1 on ε-separated clusters, and it sums to `n`. [`DensityVector::normalized`]
//! gives the sum-1 version.

mod chain;
mod stationary;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::error::{Error, Result};
use crate::kernels::SparseKernel;
use crate::neighbors::{build_eps_graph, GraphMode, NeighborGraph};
use crate::sparse::Csr;

pub use chain::{chain_structure, ChainStructure, ClosedClass};
pub use stationary::{density_kd, stationary_exact, KdOptions, EXACT_SIZE_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    Naive,
    Lc,
    Kd,
    Fkd,
    FkdNormalized,
}

impl DensityKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DensityKind::Naive => "naive",
            DensityKind::Lc => "lc",
            DensityKind::Kd => "kd",
            DensityKind::Fkd => "fkd",
            DensityKind::FkdNormalized => "fkd-normalized",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityVector {
    pub values: Vec<f64>,
    pub kind: DensityKind,
    /// Hyper-parameters and solver diagnostics that produced the values.
    pub params: BTreeMap<String, f64>,
}

impl DensityVector {
    fn new(values: Vec<f64>, kind: DensityKind) -> Self {
        DensityVector {
            values,
            kind,
            params: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Rescaled to sum 1. A raw fkd vector becomes `fkd-normalized`.
    pub fn normalized(&self) -> DensityVector {
        let total = self.sum();
        let kind = match self.kind {
            DensityKind::Fkd => DensityKind::FkdNormalized,
            k => k,
        };
        DensityVector {
            values: self.values.iter().map(|v| v / total).collect(),
            kind,
            params: self.params.clone(),
        }
    }

    /// `index,value,kind` rows with a header line.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "index,value,kind")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i},{v:e},{}", self.kind.as_str())?;
        }
        Ok(())
    }
}

/// Γ(m / 2) for integer `m >= 1`.
fn gamma_half(m: usize) -> f64 {
    let (mut z, mut g) = if m.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (0.5, PI.sqrt())
    };
    while z < m as f64 / 2.0 {
        g *= z;
        z += 1.0;
    }
    g
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma_half(d + 2)
}

/// `n eps^d V_d`, computed in log space.
pub fn naive_normalizer(n: usize, eps: f64, d: usize) -> f64 {
    ((n as f64).ln() + d as f64 * eps.ln() + unit_ball_volume(d).ln()).exp()
}

pub fn density_naive(ds: &Dataset, eps: f64) -> Result<DensityVector> {
    let graph = build_eps_graph(ds, eps)?;
    density_naive_from_graph(&graph, ds.dim())
}

/// Naive density from a prebuilt ε-ball graph (which lists self).
pub fn density_naive_from_graph(graph: &NeighborGraph, d: usize) -> Result<DensityVector> {
    let GraphMode::EpsBall { eps } = graph.mode() else {
        return Err(Error::param("graph", "naive density needs an eps-ball graph"));
    };
    let c = naive_normalizer(graph.len(), eps, d);
    let values = graph.lists().iter().map(|l| l.len() as f64 / c).collect();
    Ok(DensityVector::new(values, DensityKind::Naive)
        .with("eps", eps)
        .with("d", d as f64))
}

pub fn density_lc(rho: &DensityVector, knn: &NeighborGraph) -> Result<DensityVector> {
    if rho.kind != DensityKind::Naive {
        return Err(Error::param(
            "rho",
            format!("expected a naive density, got {}", rho.kind.as_str()),
        ));
    }
    let GraphMode::Knn { k } = knn.mode() else {
        return Err(Error::param("graph", "local contrast needs a kNN graph"));
    };
    Error::check_len("knn graph", knn.len(), rho.len())?;
    let n = rho.len() as f64;
    let values = knn
        .lists()
        .iter()
        .enumerate()
        .map(|(i, list)| {
            let below = list.iter().filter(|nb| rho.values[i] > rho.values[nb.index]).count();
            below as f64 / n
        })
        .collect();
    let mut out = DensityVector::new(values, DensityKind::Lc).with("k", k as f64);
    if let Some(&eps) = rho.params.get("eps") {
        out = out.with("eps", eps);
    }
    Ok(out)
}

/// Row-stochastic `p(x, y) = k(x, y) / d(x)` with the degrees `d` kept.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    matrix: Csr,
    degrees: Vec<f64>,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn matrix(&self) -> &Csr {
        &self.matrix
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// `||x^T P - x^T||_1`.
    pub fn stationarity_residual(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n()];
        self.matrix.left_mul(x, &mut y);
        y.iter().zip(x).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Builds directly from rows that already sum to 1, for hand-made chains.
    pub fn from_stochastic_rows(rows: Vec<Vec<f64>>) -> Result<TransitionMatrix> {
        let n = rows.len();
        let sparse = rows
            .into_iter()
            .map(|r| {
                Error::check_len("transition row", r.len(), n)?;
                Ok(r.into_iter().enumerate().filter(|&(_, v)| v != 0.0).collect())
            })
            .collect::<Result<Vec<Vec<(usize, f64)>>>>()?;
        let matrix = Csr::from_rows(sparse);
        for (i, s) in matrix.row_sums().into_iter().enumerate() {
            if (s - 1.0).abs() > 1e-12 || matrix.iter_row(i).any(|(_, v)| !(0.0..=1.0).contains(&v)) {
                return Err(Error::param("rows", format!("row {i} is not a probability vector")));
            }
        }
        Ok(TransitionMatrix {
            matrix,
            degrees: vec![1.0; n],
        })
    }
}

pub fn build_transition(kmat: &SparseKernel) -> Result<TransitionMatrix> {
    let k = kmat.matrix();
    let degrees = k.row_sums();
    if let Some(i) = degrees.iter().position(|&d| d.is_nan() || d <= 0.0) {
        return Err(Error::ZeroDegree(i));
    }
    let matrix = k.map_values(|i, _, v| v / degrees[i]);
    Ok(TransitionMatrix { matrix, degrees })
}

/// Column sums of `P`, one pass over the stored entries.
pub fn density_fkd(p: &TransitionMatrix) -> DensityVector {
    DensityVector::new(p.matrix.column_sums(), DensityKind::Fkd)
}

/// The same column sums straight from the kernel: one streaming pass per row
/// with `O(n)` extra memory, never forming `P`. Bitwise equal to
/// [`density_fkd`] of [`build_transition`].
pub fn density_fkd_streaming(kmat: &SparseKernel) -> Result<DensityVector> {
    let k = kmat.matrix();
    let mut out = vec![0.0; k.n()];
    for i in 0..k.n() {
        let (cols, vals) = k.row(i);
        let d: f64 = vals.iter().sum();
        if d.is_nan() || d <= 0.0 {
            return Err(Error::ZeroDegree(i));
        }
        for (&j, &v) in cols.iter().zip(vals) {
            out[j] += v / d;
        }
    }
    Ok(DensityVector::new(out, DensityKind::Fkd))
}

/// Mean fkd value within each label group, as `(label, mean)` sorted by label.
pub fn fkd_cluster_mean(fkd: &DensityVector, labels: &[usize]) -> Result<Vec<(usize, f64)>> {
    Error::check_len("labels", labels.len(), fkd.len())?;
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (&l, &v) in labels.iter().zip(&fkd.values) {
        let e = acc.entry(l).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    Ok(acc.into_iter().map(|(l, (s, c))| (l, s / c as f64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_matrix, KernelSpec};
    use crate::neighbors::build_knn_graph;
    use approx::assert_abs_diff_eq;

    fn line(xs: &[f64]) -> Dataset {
        Dataset::new("line", xs.iter().map(|&x| vec![x]).collect(), None).unwrap()
    }

    #[test]
    fn ball_volumes() {
        assert_abs_diff_eq!(unit_ball_volume(1), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(unit_ball_volume(2), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(unit_ball_volume(3), 4.0 / 3.0 * PI, epsilon = 1e-14);
        assert_abs_diff_eq!(unit_ball_volume(4), PI * PI / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(unit_ball_volume(5), 8.0 * PI * PI / 15.0, epsilon = 1e-14);
    }

    #[test]
    fn naive_collinear() {
        let rho = density_naive(&line(&[0.0, 1.0, 2.0]), 1.5).unwrap();
        // counts [2, 3, 2] over n * eps * V_1 = 3 * 1.5 * 2 = 9
        let expect = [2.0 / 9.0, 3.0 / 9.0, 2.0 / 9.0];
        for (a, b) in rho.values.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_eq!(rho.kind, DensityKind::Naive);
    }

    #[test]
    fn naive_isolated_and_single_point() {
        let rho = density_naive(&line(&[0.0, 1.0, 2.0]), 0.25).unwrap();
        let c = 1.0 / (3.0 * 0.25 * 2.0);
        assert!(rho.values.iter().all(|v| (v - c).abs() < 1e-15));
        let single = Dataset::new("one", vec![vec![1.0, 2.0]], None).unwrap();
        let rho = density_naive(&single, 0.5).unwrap();
        assert_abs_diff_eq!(rho.values[0], 1.0 / (0.25 * PI), epsilon = 1e-14);
        assert!(density_naive(&single, 0.0).is_err());
    }

    #[test]
    fn lc_cases() {
        let ds = line(&[0.0, 1.0, 2.0]);
        let rho = density_naive(&ds, 1.5).unwrap();
        let knn = build_knn_graph(&ds, 2).unwrap();
        let lc = density_lc(&rho, &knn).unwrap();
        assert_eq!(lc.values, vec![0.0, 2.0 / 3.0, 0.0]);

        let flat = density_naive(&ds, 0.1).unwrap();
        assert!(density_lc(&flat, &knn).unwrap().values.iter().all(|&v| v == 0.0));

        // unique maximum with k = n - 1
        let ds = line(&[0.0, 0.1, 0.2, 5.0]);
        let rho = density_naive(&ds, 0.15).unwrap();
        let knn = build_knn_graph(&ds, 3).unwrap();
        let lc = density_lc(&rho, &knn).unwrap();
        assert_eq!(lc.values[1], 3.0 / 4.0);

        let other = build_knn_graph(&line(&[0.0, 1.0]), 1).unwrap();
        assert!(matches!(density_lc(&rho, &other), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn two_state_transition() {
        let a = 0.3;
        let k = SparseKernel::from_rows(
            KernelSpec::IndicatorBall { eps: 1.0 },
            vec![vec![(0, 1.0), (1, a)], vec![(0, a), (1, 1.0)]],
        )
        .unwrap();
        let p = build_transition(&k).unwrap();
        let dense = p.matrix().to_dense();
        assert_abs_diff_eq!(dense[0][0], 1.0 / (1.0 + a), epsilon = 1e-15);
        assert_abs_diff_eq!(dense[0][1], a / (1.0 + a), epsilon = 1e-15);
        assert_abs_diff_eq!(dense[1][0], a / (1.0 + a), epsilon = 1e-15);
        assert_abs_diff_eq!(dense[1][1], 1.0 / (1.0 + a), epsilon = 1e-15);
        assert_eq!(p.degrees(), &[1.0 + a, 1.0 + a]);
    }

    #[test]
    fn diagonal_kernel_gives_identity() {
        let ds = line(&[0.0, 1.0, 2.0]);
        let k = kernel_matrix(&ds, &KernelSpec::IndicatorBall { eps: 0.5 }).unwrap();
        let p = build_transition(&k).unwrap();
        assert_eq!(
            p.matrix().to_dense(),
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]
        );
        assert_eq!(density_fkd(&p).values, vec![1.0; 3]);
    }

    #[test]
    fn zero_degree_row_rejected() {
        let k = SparseKernel::from_rows(KernelSpec::IndicatorBall { eps: 1.0 }, vec![vec![(0, 1.0)], vec![]]).unwrap();
        assert!(matches!(build_transition(&k), Err(Error::ZeroDegree(1))));
    }

    #[test]
    fn fkd_column_sums() {
        let p = TransitionMatrix::from_stochastic_rows(vec![vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let fkd = density_fkd(&p);
        assert_eq!(fkd.values, vec![0.75, 1.25]);
        assert_eq!(fkd.normalized().values, vec![0.375, 0.625]);
        assert_eq!(fkd.normalized().kind, DensityKind::FkdNormalized);
    }

    #[test]
    fn streaming_fkd_matches_transition_route() {
        let ds = line(&[0.0, 0.3, 0.7, 1.6, 2.0, 2.1, 5.0, 5.2]);
        for spec in [
            KernelSpec::SymmetricGaussian { eps: 0.9, h: 0.5 },
            KernelSpec::AsymmetricGaussian { k: 3, h: 0.5 },
        ] {
            let kmat = kernel_matrix(&ds, &spec).unwrap();
            let via_p = density_fkd(&build_transition(&kmat).unwrap());
            assert_eq!(density_fkd_streaming(&kmat).unwrap(), via_p);
        }
    }

    #[test]
    fn fkd_cluster_means_single_cluster() {
        let p =
            TransitionMatrix::from_stochastic_rows(vec![vec![0.2, 0.8, 0.0], vec![0.1, 0.1, 0.8], vec![0.9, 0.0, 0.1]])
                .unwrap();
        let means = fkd_cluster_mean(&density_fkd(&p), &[0, 0, 0]).unwrap();
        assert_eq!(means.len(), 1);
        assert_abs_diff_eq!(means[0].1, 1.0, epsilon = 1e-12);
        assert!(fkd_cluster_mean(&density_fkd(&p), &[0, 0]).is_err());
    }

    #[test]
    fn csv_export() {
        let p = TransitionMatrix::from_stochastic_rows(vec![vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let mut buf = Vec::new();
        density_fkd(&p).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("index,value,kind"));
        assert_eq!(text.lines().nth(2), Some("1,1.25e0,fkd"));
    }
}
