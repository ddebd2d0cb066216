//! One clustering job: load, standardize, graph, kernel, density, cluster,
//! evaluate.

use kdiff::clustering::{dbscan_cluster, dpc_cluster, dpc_state, ClusterResult};
use kdiff::datasets::{load_dataset, sample_gmm, standardize, Dataset, LabelColumn};
use kdiff::density::{
    build_transition, chain_structure, density_fkd_streaming, density_kd, density_lc, density_naive_from_graph,
    DensityVector, TransitionMatrix,
};
use kdiff::kernels::{kernel_on_graph, KernelSpec};
use kdiff::metrics::{evaluate, EvalReport};
use kdiff::neighbors::{build_eps_graph, build_knn_graph, NeighborGraph};
use kdiff::Error;

use crate::config::{Algorithm, ClusterParams, DensityChoice, DensityParams, RunConfig, FALLBACK_DAMPING};
use crate::error::CliError;

pub fn load_input(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let raw = match (&cfg.data, &cfg.gmm) {
        (Some(_), Some(_)) => return Err(CliError::validation("data", "conflicts with `gmm`; give one source")),
        (Some(path), None) => {
            let col = match &cfg.label_column {
                Some(s) => {
                    let Ok(col) = s.parse::<LabelColumn>();
                    col
                }
                None => LabelColumn::Last,
            };
            load_dataset(path, &col).map_err(CliError::stage("load"))?
        }
        (None, Some(spec)) => sample_gmm(spec).map_err(CliError::stage("load"))?,
        (None, None) => return Err(CliError::validation("data", "is required (or give `gmm`)")),
    };
    Ok(if cfg.standardize.unwrap_or(true) {
        standardize(&raw)
    } else {
        raw
    })
}

pub fn kernel_spec(params: &DensityParams) -> Option<KernelSpec> {
    let h = params.h;
    match params.choice {
        DensityChoice::KdSym | DensityChoice::FkdSym => Some(KernelSpec::SymmetricGaussian { eps: params.eps?, h }),
        DensityChoice::KdAsym | DensityChoice::FkdAsym => Some(KernelSpec::AsymmetricGaussian { k: params.k?, h }),
        DensityChoice::Naive | DensityChoice::Lc => None,
    }
}

/// Power iteration with the configured damping. When none is configured an
/// irreducible aperiodic chain runs undamped, while any other chain, or an
/// undamped run that fails to settle, gets [`FALLBACK_DAMPING`]. The fallback
/// is visible in the params.
pub fn kd_with_fallback(p: &TransitionMatrix, params: &DensityParams) -> Result<DensityVector, Error> {
    if let Some(beta) = params.damping {
        return density_kd(p, &params.kd_options(beta));
    }
    let structure = chain_structure(p);
    if structure.is_irreducible() && structure.periodic_class().is_none() {
        match density_kd(p, &params.kd_options(0.0)) {
            Err(Error::Stalled { .. } | Error::NoConvergence { .. }) => {}
            other => return other,
        }
    }
    let mut opts = params.kd_options(FALLBACK_DAMPING);
    opts.max_iter = opts.max_iter.max(damped_iteration_bound(opts.tol, FALLBACK_DAMPING));
    let mut rho = density_kd(p, &opts)?;
    rho.params.insert("damping_fallback".into(), 1.0);
    rho.params
        .insert("closed_classes".into(), structure.closed.len() as f64);
    Ok(rho)
}

/// Iterations after which a walk with uniform-jump weight `beta` is within
/// `tol` in L1 of its limit from any start, since its iterates contract by
/// `1 - beta` per step.
pub fn damped_iteration_bound(tol: f64, beta: f64) -> usize {
    ((tol / 2.0).ln() / (1.0 - beta).ln()).ceil() as usize + 1
}

fn stamp(mut rho: DensityVector, params: &DensityParams) -> DensityVector {
    if let Some(eps) = params.eps.filter(|_| params.choice.needs_eps()) {
        rho.params.insert("eps".into(), eps);
    }
    if let Some(k) = params.k.filter(|_| params.choice.needs_k()) {
        rho.params.insert("k".into(), k as f64);
    }
    if params.choice.uses_h() {
        rho.params.insert("h".into(), params.h);
    }
    rho
}

pub fn compute_density(ds: &Dataset, params: &DensityParams) -> Result<DensityVector, CliError> {
    params.validate()?;
    let rho = match params.choice {
        DensityChoice::Naive | DensityChoice::Lc => {
            let g = build_eps_graph(ds, params.eps.unwrap_or_default()).map_err(CliError::stage("graph"))?;
            let naive = density_naive_from_graph(&g, ds.dim()).map_err(CliError::stage("density"))?;
            if params.choice == DensityChoice::Naive {
                naive
            } else {
                let knn = build_knn_graph(ds, params.k.unwrap_or_default()).map_err(CliError::stage("graph"))?;
                density_lc(&naive, &knn).map_err(CliError::stage("density"))?
            }
        }
        _ => {
            let spec = kernel_spec(params).expect("validated");
            spec.validate().map_err(CliError::stage("kernel"))?;
            let graph = match spec.graph_mode() {
                kdiff::neighbors::GraphMode::EpsBall { eps } => build_eps_graph(ds, eps),
                kdiff::neighbors::GraphMode::Knn { k } => build_knn_graph(ds, k),
            }
            .map_err(CliError::stage("graph"))?;
            let kmat = kernel_on_graph(&graph, &spec).map_err(CliError::stage("kernel"))?;
            if params.choice.is_kd() {
                let p = build_transition(&kmat).map_err(CliError::stage("density"))?;
                kd_with_fallback(&p, params).map_err(CliError::stage("density"))?
            } else {
                density_fkd_streaming(&kmat).map_err(CliError::stage("density"))?
            }
        }
    };
    Ok(stamp(rho, params))
}

/// Number of DPC centers: the configured `c`, else the number of classes.
pub fn resolve_c(ds: &Dataset, c: Option<usize>) -> Result<usize, CliError> {
    c.or_else(|| ds.num_classes())
        .ok_or_else(|| CliError::validation("c", "is required when the dataset has no labels"))
}

pub fn eps_graph(ds: &Dataset, eps: f64) -> Result<NeighborGraph, CliError> {
    build_eps_graph(ds, eps).map_err(CliError::stage("graph"))
}

pub fn cluster(
    ds: &Dataset,
    rho: &DensityVector,
    params: &ClusterParams,
    dbscan_graph: Option<&NeighborGraph>,
) -> Result<ClusterResult, CliError> {
    match params.algorithm {
        Algorithm::Dpc => {
            let c = resolve_c(ds, params.c)?;
            let state = dpc_state(rho, ds).map_err(CliError::stage("cluster"))?;
            dpc_cluster(&state, c).map_err(CliError::stage("cluster"))
        }
        Algorithm::Dbscan => {
            let tau = params
                .core_threshold
                .ok_or_else(|| CliError::missing_for("core_threshold", "dbscan"))?;
            let owned;
            let graph = match dbscan_graph {
                Some(g) => g,
                None => {
                    let eps = params.eps.ok_or_else(|| CliError::missing_for("eps", "dbscan"))?;
                    owned = eps_graph(ds, eps)?;
                    &owned
                }
            };
            dbscan_cluster(rho, graph, tau).map_err(CliError::stage("cluster"))
        }
    }
}

pub fn score(ds: &Dataset, result: &ClusterResult) -> Result<EvalReport, CliError> {
    let truth = ds
        .labels()
        .ok_or_else(|| CliError::validation("label_column", "evaluation needs ground-truth labels"))?;
    evaluate(result, truth).map_err(CliError::stage("evaluate"))
}

/// A finished job.
#[derive(Debug, Clone)]
pub struct JobOutput {
    pub density: DensityVector,
    pub result: ClusterResult,
    pub eval: Option<EvalReport>,
}

pub fn run_on(ds: &Dataset, dp: &DensityParams, cp: &ClusterParams) -> Result<JobOutput, CliError> {
    if cp.algorithm == Algorithm::Dbscan {
        cp.eps.ok_or_else(|| CliError::missing_for("eps", "dbscan"))?;
        cp.core_threshold
            .ok_or_else(|| CliError::missing_for("core_threshold", "dbscan"))?;
    }
    let density = compute_density(ds, dp)?;
    let result = cluster(ds, &density, cp, None)?;
    let eval = match ds.labels() {
        Some(_) => Some(score(ds, &result)?),
        None => None,
    };
    Ok(JobOutput { density, result, eval })
}
