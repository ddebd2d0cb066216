//! Default parameter grids and the grid search behind `run --tune`.

use kdiff::datasets::Dataset;
use kdiff::density::DensityVector;
use kdiff::neighbors::euclidean;

use crate::config::{Algorithm, ClusterParams, DensityParams};
use crate::error::CliError;
use crate::pipeline::{cluster, compute_density, eps_graph, score, JobOutput};

pub const EPS_GRID_LEN: usize = 20;
pub const EPS_LOW_PERCENTILE: f64 = 1.0;
pub const EPS_HIGH_PERCENTILE: f64 = 50.0;
pub const K_GRID: [usize; 5] = [5, 10, 20, 40, 80];
pub const CORE_GRID_LEN: usize = 19;

/// Points used to estimate the pairwise-distance percentiles.
const DISTANCE_SAMPLE: usize = 1000;

/// Linear-interpolated percentile of sorted data.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn log_space(lo: f64, hi: f64, len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..len)
        .map(|i| (a + (b - a) * i as f64 / (len - 1) as f64).exp())
        .collect()
}

/// Log-spaced radii between the 1st and 50th percentile of pairwise
/// distances, estimated on a seeded subsample of at most 1000 points.
pub fn eps_grid(ds: &Dataset, seed: u64) -> Result<Vec<f64>, CliError> {
    let sample;
    let ds = if ds.len() > DISTANCE_SAMPLE {
        sample = ds.subsample(DISTANCE_SAMPLE, seed).map_err(CliError::stage("graph"))?;
        &sample
    } else {
        ds
    };
    let n = ds.len();
    let mut dists: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| euclidean(ds.row(i), ds.row(j)))
        .filter(|&d| d > 0.0)
        .collect();
    if dists.is_empty() {
        return Err(CliError::validation("eps", "cannot derive a grid: all points coincide"));
    }
    dists.sort_by(f64::total_cmp);
    let lo = percentile(&dists, EPS_LOW_PERCENTILE);
    let hi = percentile(&dists, EPS_HIGH_PERCENTILE);
    Ok(log_space(lo, hi, EPS_GRID_LEN))
}

/// The fixed neighbor counts, capped at `n - 1` and deduplicated.
pub fn k_grid(n: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = K_GRID
        .iter()
        .map(|&k| k.min(n.saturating_sub(1)))
        .filter(|&k| k > 0)
        .collect();
    ks.dedup();
    ks
}

/// Density quantiles 5%, 10%, ..., 95%, deduplicated.
pub fn core_threshold_grid(rho: &DensityVector) -> Vec<f64> {
    let mut v = rho.values.clone();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = (1..=CORE_GRID_LEN)
        .map(|i| percentile(&v, 100.0 * i as f64 / (CORE_GRID_LEN + 1) as f64))
        .collect();
    out.dedup();
    out
}

#[derive(Debug, Clone)]
pub struct Tuned {
    pub density_params: DensityParams,
    pub cluster_params: ClusterParams,
    pub best: JobOutput,
    pub evaluated: usize,
    /// Grid points whose density or clustering failed numerically.
    pub failed: usize,
}

/// Exhaustive search over the default grids of every parameter left unset,
/// maximizing pairwise F. Ties keep the earliest grid point (ascending
/// values, eps before k before core_threshold).
pub fn tune(ds: &Dataset, dp: &DensityParams, cp: &ClusterParams, seed: u64) -> Result<Tuned, CliError> {
    if ds.labels().is_none() {
        return Err(CliError::validation("label_column", "tuning needs ground-truth labels"));
    }
    let dbscan = cp.algorithm == Algorithm::Dbscan;
    let wants_eps = dp.choice.needs_eps() || dbscan;
    let eps_values: Vec<Option<f64>> = match (wants_eps, dp.eps.or(cp.eps)) {
        (false, _) => vec![None],
        (true, Some(e)) => vec![Some(e)],
        (true, None) => eps_grid(ds, seed)?.into_iter().map(Some).collect(),
    };
    let k_values: Vec<Option<usize>> = match (dp.choice.needs_k(), dp.k) {
        (false, _) => vec![None],
        (true, Some(k)) => vec![Some(k)],
        (true, None) => k_grid(ds.len()).into_iter().map(Some).collect(),
    };

    let mut best: Option<(f64, Tuned)> = None;
    let (mut evaluated, mut failed) = (0, 0);
    for &eps in &eps_values {
        let graph = match (dbscan, eps) {
            (true, Some(e)) => Some(eps_graph(ds, e)?),
            _ => None,
        };
        for &k in &k_values {
            let dp_i = DensityParams { eps, k, ..*dp };
            let rho = match compute_density(ds, &dp_i) {
                Ok(r) => r,
                Err(e) if e.exit_code() == 2 => {
                    failed += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let taus: Vec<Option<f64>> = match (dbscan, cp.core_threshold) {
                (false, t) => vec![t],
                (true, Some(t)) => vec![Some(t)],
                (true, None) => core_threshold_grid(&rho).into_iter().map(Some).collect(),
            };
            for &tau in &taus {
                let cp_i = ClusterParams {
                    eps: if dbscan { eps } else { cp.eps },
                    core_threshold: tau,
                    ..*cp
                };
                let result = cluster(ds, &rho, &cp_i, graph.as_ref())?;
                let eval = score(ds, &result)?;
                evaluated += 1;
                let f = eval.pairwise.f;
                if best.as_ref().is_none_or(|(bf, _)| f > *bf) {
                    let job = JobOutput {
                        density: rho.clone(),
                        result,
                        eval: Some(eval),
                    };
                    best = Some((
                        f,
                        Tuned {
                            density_params: dp_i,
                            cluster_params: cp_i,
                            best: job,
                            evaluated: 0,
                            failed: 0,
                        },
                    ));
                }
            }
        }
    }
    match best {
        Some((_, t)) => Ok(Tuned { evaluated, failed, ..t }),
        None => Err(CliError::validation("grid", "no grid point could be evaluated")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DensityChoice;

    #[test]
    fn log_space_endpoints() {
        let g = log_space(0.1, 10.0, 5);
        assert!((g[0] - 0.1).abs() < 1e-15);
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert!((g[4] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn percentiles_interpolate() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 50.0), 2.0);
        assert_eq!(percentile(&v, 12.5), 0.5);
    }

    #[test]
    fn k_grid_capped() {
        assert_eq!(k_grid(1000), vec![5, 10, 20, 40, 80]);
        assert_eq!(k_grid(30), vec![5, 10, 20, 29]);
        assert_eq!(k_grid(4), vec![3]);
    }

    #[test]
    fn eps_grid_shape() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64]).collect();
        let ds = Dataset::new("line", rows, None).unwrap();
        let g = eps_grid(&ds, 0).unwrap();
        assert_eq!(g.len(), EPS_GRID_LEN);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g[0] >= 1.0 && g[19] <= 49.0);
    }

    #[test]
    fn tuning_beats_fixed_point() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![(i / 20) as f64 * 5.0 + (i % 20) as f64 * 0.05 + (i % 3) as f64 * 0.01])
            .collect();
        let labels = (0..60).map(|i| i / 20).collect();
        let ds = Dataset::new("steps", rows, Some(labels)).unwrap();
        let dp = DensityParams::new(DensityChoice::FkdAsym);
        let t = tune(&ds, &dp, &ClusterParams::dpc(None), 0).unwrap();
        assert_eq!(t.evaluated, k_grid(60).len());
        let mut fixed = dp;
        fixed.k = Some(40);
        let f = crate::pipeline::run_on(&ds, &fixed, &ClusterParams::dpc(None))
            .unwrap()
            .eval
            .unwrap()
            .pairwise
            .f;
        assert!(t.best.eval.unwrap().pairwise.f >= f);
    }
}
