use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kdiff::datasets::GmmSpec;
use kdiff_cli::alloc::TrackingAlloc;
use kdiff_cli::commands::{self, fig1_spec};
use kdiff_cli::config::{Algorithm, Axis, DensityChoice, Grid};
use kdiff_cli::{CliError, RunConfig};

#[global_allocator]
static ALLOC: TrackingAlloc = TrackingAlloc;

#[derive(Parser)]
#[command(name = "kdiff", version, about = "Kernel diffusion density clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one clustering job and write report.json and labels.csv.
    Run {
        #[command(flatten)]
        job: JobArgs,
        /// Grid-search every unset eps / k / core_threshold for the best pairwise F.
        #[arg(long)]
        tune: bool,
    },
    /// Vary one parameter and write sweep.csv.
    Sweep {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long)]
        grid_axis: Option<Axis>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid_values: Option<Vec<f64>>,
    },
    /// Time KD against FKD on seeded subsamples and write bench.csv.
    Bench {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Sample a Gaussian mixture to CSV.
    Gmm {
        /// JSON mixture spec.
        #[arg(long, conflicts_with = "preset")]
        spec: Option<PathBuf>,
        /// Built-in mixture: `fig1` (one tight and two broad clusters).
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value_t = 600)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a Markdown table of grid-tuned DPC pairwise F per dataset and density.
    Table {
        /// CSV files, one table row each.
        #[arg(long = "data", required = true)]
        data: Vec<PathBuf>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "naive,lc,kd-sym,kd-asym,fkd-sym,fkd-asym"
        )]
        densities: Vec<DensityChoice>,
        #[arg(long)]
        label_column: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct JobArgs {
    /// JSON file with any RunConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// `last` (default), `none`, a zero-based index or a header name.
    #[arg(long)]
    label_column: Option<String>,
    /// JSON mixture spec used instead of --data.
    #[arg(long)]
    gmm: Option<PathBuf>,
    #[arg(long)]
    standardize: Option<bool>,
    #[arg(long)]
    density: Option<DensityChoice>,
    #[arg(long)]
    algorithm: Option<Algorithm>,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    #[arg(long)]
    c: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    core_threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Uniform-jump weight for kd; unset tries 0 and falls back to 1e-3.
    #[arg(long, allow_negative_numbers = true)]
    damping: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(path.display().to_string(), format!("could not be read: {e}")))
}

impl JobArgs {
    fn resolve(&self, extra: RunConfig) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => RunConfig::from_json(&read_to_string(p)?)?,
            None => RunConfig::default(),
        };
        let gmm = match &self.gmm {
            Some(p) => Some(GmmSpec::from_json(&read_to_string(p)?).map_err(CliError::stage("load"))?),
            None => None,
        };
        let flags = RunConfig {
            data: self.data.clone(),
            label_column: self.label_column.clone(),
            gmm,
            standardize: self.standardize,
            density: self.density,
            algorithm: self.algorithm,
            eps: self.eps,
            k: self.k,
            h: self.h,
            c: self.c,
            core_threshold: self.core_threshold,
            seed: self.seed,
            tol: self.tol,
            max_iter: self.max_iter,
            damping: self.damping,
            ..extra
        };
        let mut cfg = file.overlay(flags);
        if self.data.is_some() && self.gmm.is_none() {
            cfg.gmm = None;
        } else if self.gmm.is_some() && self.data.is_none() {
            cfg.data = None;
        }
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { job, tune } => {
            let cfg = job.resolve(RunConfig::default())?;
            let (report, _) = commands::run(&cfg, tune, job.out.as_deref())?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).map_err(std::io::Error::other)?
            );
        }
        Command::Sweep {
            job,
            grid_axis,
            grid_values,
        } => {
            let mut cfg = job.resolve(RunConfig::default())?;
            match (grid_axis, grid_values) {
                (Some(axis), Some(values)) => cfg.grid = Some(Grid { axis, values }),
                (None, None) => {}
                (None, Some(_)) => return Err(CliError::missing_for("grid_axis", "--grid-values")),
                (Some(_), None) => return Err(CliError::missing_for("grid_values", "--grid-axis")),
            }
            let table = commands::run_sweep(&cfg, job.out.as_deref())?;
            table.write_csv(std::io::stdout().lock())?;
            let best = table.best();
            println!(
                "best {} = {}: pairwise F {:.4}, bcubed F {:.4}",
                table.axis.as_str(),
                best.value,
                best.pairwise.f,
                best.bcubed.f
            );
        }
        Command::Bench { job, sizes } => {
            let cfg = job.resolve(RunConfig {
                sizes,
                ..RunConfig::default()
            })?;
            let table = commands::run_bench(&cfg, job.out.as_deref())?;
            table.write_csv(std::io::stdout().lock())?;
            if let Some(slope) = table.fkd_slope {
                println!("fkd log-log slope vs nnz: {slope:.3}");
            }
            if !kdiff_cli::alloc::is_active() {
                eprintln!("note: heap tracking inactive, peak columns left empty");
            }
        }
        Command::Gmm {
            spec,
            preset,
            n,
            seed,
            out,
        } => {
            let spec = match (spec, preset.as_deref()) {
                (Some(p), _) => GmmSpec::from_json(&read_to_string(&p)?).map_err(CliError::stage("load"))?,
                (None, Some("fig1")) => fig1_spec(n, seed),
                (None, Some(other)) => {
                    return Err(CliError::validation("preset", format!("unknown preset `{other}`")));
                }
                (None, None) => return Err(CliError::missing("spec")),
            };
            let ds = commands::run_gmm(&spec, &out)?;
            eprintln!("wrote {} points to {}", ds.len(), out.display());
        }
        Command::Table {
            data,
            densities,
            label_column,
            seed,
        } => {
            let base = RunConfig {
                label_column,
                seed,
                ..RunConfig::default()
            };
            let sources: Vec<RunConfig> = data
                .into_iter()
                .map(|p| RunConfig {
                    data: Some(p),
                    ..RunConfig::default()
                })
                .collect();
            print!("{}", commands::table(&base, &sources, &densities)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
