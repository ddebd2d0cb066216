//! The subcommands, minus argument parsing.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use kdiff::datasets::{sample_gmm, Dataset, GmmComponent, GmmSpec};
use kdiff::metrics::Scores;
use serde::Serialize;

use crate::bench::{bench, BenchTable};
use crate::config::{Algorithm, DensityChoice, RunConfig};
use crate::error::CliError;
use crate::pipeline::{load_input, resolve_c, run_on, JobOutput};
use crate::sweep::{sweep, SweepTable};
use crate::tune::tune;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub classes: Option<usize>,
}

impl DatasetInfo {
    pub fn of(ds: &Dataset) -> Self {
        DatasetInfo {
            name: ds.name().to_string(),
            n: ds.len(),
            d: ds.dim(),
            classes: ds.num_classes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningInfo {
    pub evaluated: usize,
    pub failed: usize,
}

/// Contents of `report.json`. Holds no timings, so identical inputs give
/// identical bytes. `config` is fully resolved: re-running it without
/// tuning reproduces the job.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub dataset: DatasetInfo,
    pub config: RunConfig,
    pub density: String,
    pub density_params: BTreeMap<String, f64>,
    pub algorithm: String,
    pub cluster_params: BTreeMap<String, f64>,
    pub num_clusters: usize,
    pub noise: usize,
    pub pairwise: Option<Scores>,
    pub bcubed: Option<Scores>,
    pub tuning: Option<TuningInfo>,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs one job, optionally grid-tuned, and writes `report.json` and
/// `labels.csv` into `out` when given.
pub fn run(cfg: &RunConfig, tune_grid: bool, out: Option<&Path>) -> Result<(Report, JobOutput), CliError> {
    let ds = load_input(cfg)?;
    let mut dp = cfg.density_params()?;
    let mut cp = cfg.cluster_params()?;
    let (job, tuning) = if tune_grid {
        let t = tune(&ds, &dp, &cp, cfg.seed.unwrap_or(0))?;
        dp = t.density_params;
        cp = t.cluster_params;
        let info = TuningInfo {
            evaluated: t.evaluated,
            failed: t.failed,
        };
        (t.best, Some(info))
    } else {
        (run_on(&ds, &dp, &cp)?, None)
    };

    let dbscan = cp.algorithm == Algorithm::Dbscan;
    let resolved = RunConfig {
        standardize: Some(cfg.standardize.unwrap_or(true)),
        algorithm: Some(cp.algorithm),
        eps: if dp.choice.needs_eps() {
            dp.eps
        } else {
            cp.eps.filter(|_| dbscan)
        },
        k: dp.k.filter(|_| dp.choice.needs_k()),
        h: dp.choice.uses_h().then_some(dp.h),
        c: if dbscan { None } else { Some(resolve_c(&ds, cp.c)?) },
        core_threshold: cp.core_threshold.filter(|_| dbscan),
        tol: dp.choice.is_kd().then_some(dp.tol),
        max_iter: dp.choice.is_kd().then_some(dp.max_iter),
        damping: dp.damping.filter(|_| dp.choice.is_kd()),
        grid: None,
        sizes: None,
        ..cfg.clone()
    };
    let report = Report {
        version: env!("CARGO_PKG_VERSION"),
        dataset: DatasetInfo::of(&ds),
        config: resolved,
        density: job.density.kind.as_str().to_string(),
        density_params: job.density.params.clone(),
        algorithm: job.result.provenance.algorithm.clone(),
        cluster_params: job.result.provenance.params.clone(),
        num_clusters: job.result.num_clusters,
        noise: job.result.noise_count(),
        pairwise: job.eval.as_ref().map(|e| e.pairwise),
        bcubed: job.eval.as_ref().map(|e| e.bcubed),
        tuning,
    };
    if let Some(dir) = out {
        let mut w = create(&dir.join("report.json"))?;
        serde_json::to_writer_pretty(&mut w, &report).map_err(std::io::Error::other)?;
        writeln!(w)?;
        w.flush()?;
        let mut w = create(&dir.join("labels.csv"))?;
        job.result.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok((report, job))
}

pub fn run_sweep(cfg: &RunConfig, out: Option<&Path>) -> Result<SweepTable, CliError> {
    let grid = cfg.grid.as_ref().ok_or_else(|| CliError::missing("grid"))?;
    let ds = load_input(cfg)?;
    let table = sweep(&ds, &cfg.density_params()?, &cfg.cluster_params()?, grid)?;
    if let Some(dir) = out {
        let mut w = create(&dir.join("sweep.csv"))?;
        table.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(table)
}

pub fn run_bench(cfg: &RunConfig, out: Option<&Path>) -> Result<BenchTable, CliError> {
    let sizes = cfg.sizes.as_ref().ok_or_else(|| CliError::missing("sizes"))?;
    let ds = load_input(cfg)?;
    let table = bench(&ds, &cfg.density_params()?, sizes, cfg.seed.unwrap_or(0))?;
    if let Some(dir) = out {
        let mut w = create(&dir.join("bench.csv"))?;
        table.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(table)
}

/// Three separated isotropic 2-d components, each with its own weight and
/// variance: a tight heavy cluster, a medium one and a broad light one.
pub fn fig1_spec(n: usize, seed: u64) -> GmmSpec {
    let comp = |weight, mean: [f64; 2], variance| GmmComponent {
        weight,
        mean: mean.to_vec(),
        variance,
    };
    GmmSpec {
        components: vec![
            comp(0.6, [0.0, 0.0], 0.02),
            comp(0.3, [3.0, 0.0], 0.25),
            comp(0.1, [0.0, 4.0], 1.0),
        ],
        n,
        seed,
    }
}

/// Writes features as `x0..x{d-1}` plus a `label` column when labels exist.
pub fn write_dataset_csv(ds: &Dataset, mut out: impl Write) -> std::io::Result<()> {
    let mut header: Vec<String> = (0..ds.dim()).map(|j| format!("x{j}")).collect();
    if ds.labels().is_some() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for (i, row) in ds.rows().enumerate() {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = ds.labels() {
            cells.push(l[i].to_string());
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn run_gmm(spec: &GmmSpec, out: &Path) -> Result<Dataset, CliError> {
    let ds = sample_gmm(spec).map_err(CliError::stage("load"))?;
    let mut w = create(out)?;
    write_dataset_csv(&ds, &mut w)?;
    w.flush()?;
    Ok(ds)
}

/// Grid-tuned DPC pairwise F (in percent) for every dataset and density,
/// rendered as a Markdown table with one row per dataset.
pub fn table(base: &RunConfig, datasets: &[RunConfig], densities: &[DensityChoice]) -> Result<String, CliError> {
    let mut md = String::from("| dataset |");
    for d in densities {
        md.push_str(&format!(" {} |", d.as_str()));
    }
    md.push_str("\n|---|");
    md.push_str(&"---:|".repeat(densities.len()));
    md.push('\n');
    for source in datasets {
        let mut name = None;
        let mut cells = Vec::new();
        for &d in densities {
            let cfg = RunConfig {
                density: Some(d),
                algorithm: Some(Algorithm::Dpc),
                ..base.clone().overlay(source.clone())
            };
            let (report, _) = run(&cfg, true, None)?;
            name.get_or_insert(report.dataset.name.clone());
            let f = report.pairwise.map_or(f64::NAN, |s| s.f);
            cells.push(format!("{:.1}", 100.0 * f));
        }
        md.push_str(&format!("| {} | {} |\n", name.unwrap_or_default(), cells.join(" | ")));
    }
    Ok(md)
}
