//! KD versus FKD cost at increasing sample sizes.
//!
//! Both timings start from a prebuilt kernel matrix. FKD is the streaming
//! column-sum pass; KD covers row normalization plus the power iteration.
//! Each timing is the minimum over repeated runs.

use std::hint::black_box;
use std::io::Write;
use std::time::{Duration, Instant};

use kdiff::datasets::Dataset;
use kdiff::density::{build_transition, density_fkd_streaming};
use kdiff::kernels::kernel_matrix;
use serde::Serialize;

use crate::alloc;
use crate::config::DensityParams;
use crate::error::CliError;
use crate::pipeline::{kd_with_fallback, kernel_spec};

const MIN_REPEATS: usize = 3;
const MAX_REPEATS: usize = 500;
const TIME_BUDGET: Duration = Duration::from_millis(300);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub nnz: usize,
    pub kd_seconds: f64,
    pub fkd_seconds: f64,
    pub kd_peak_bytes: Option<usize>,
    pub fkd_peak_bytes: Option<usize>,
    pub kd_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log FKD time against log nnz; needs two sizes.
    pub fkd_slope: Option<f64>,
}

impl BenchTable {
    pub fn kd_fkd_ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.kd_seconds / r.fkd_seconds).collect()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "n,nnz,kd_seconds,fkd_seconds,kd_peak_bytes,fkd_peak_bytes,kd_iterations"
        )?;
        let opt = |v: Option<usize>| v.map(|b| b.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n,
                r.nnz,
                r.kd_seconds,
                r.fkd_seconds,
                opt(r.kd_peak_bytes),
                opt(r.fkd_peak_bytes),
                r.kd_iterations
            )?;
        }
        Ok(())
    }
}

fn min_time<T>(mut f: impl FnMut() -> T) -> f64 {
    let mut best = Duration::MAX;
    let mut total = Duration::ZERO;
    let mut runs = 0;
    while runs < MIN_REPEATS || (total < TIME_BUDGET && runs < MAX_REPEATS) {
        let start = Instant::now();
        black_box(f());
        let dt = start.elapsed();
        best = best.min(dt);
        total += dt;
        runs += 1;
    }
    best.as_secs_f64()
}

pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn bench(ds: &Dataset, dp: &DensityParams, sizes: &[usize], seed: u64) -> Result<BenchTable, CliError> {
    if sizes.is_empty() {
        return Err(CliError::validation("sizes", "must contain at least one size"));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::validation("sizes", "must be strictly ascending"));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n > ds.len()) {
        return Err(CliError::validation(
            "sizes",
            format!("size {n} exceeds the dataset's {} points", ds.len()),
        ));
    }
    dp.validate()?;
    let spec = kernel_spec(dp)
        .ok_or_else(|| CliError::validation("density", "bench needs a kernel density (kd-* or fkd-*)"))?;

    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let sub = if n == ds.len() {
            ds.clone()
        } else {
            ds.subsample(n, seed).map_err(CliError::stage("load"))?
        };
        let kmat = kernel_matrix(&sub, &spec).map_err(CliError::stage("kernel"))?;
        let fkd = || density_fkd_streaming(&kmat);
        let kd = || -> Result<_, kdiff::Error> { kd_with_fallback(&build_transition(&kmat)?, dp) };

        let (rho, kd_peak) = alloc::measure(kd);
        let rho = rho.map_err(CliError::stage("density"))?;
        let (check, fkd_peak) = alloc::measure(fkd);
        check.map_err(CliError::stage("density"))?;

        rows.push(BenchRow {
            n,
            nnz: kmat.nnz(),
            kd_seconds: min_time(kd),
            fkd_seconds: min_time(fkd),
            kd_peak_bytes: kd_peak,
            fkd_peak_bytes: fkd_peak,
            kd_iterations: rho.params.get("iterations").copied().unwrap_or(0.0) as usize,
        });
    }
    let nnz: Vec<f64> = rows.iter().map(|r| r.nnz as f64).collect();
    let t: Vec<f64> = rows.iter().map(|r| r.fkd_seconds).collect();
    Ok(BenchTable {
        fkd_slope: log_log_slope(&nnz, &t),
        rows,
    })
}
