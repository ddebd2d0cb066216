//! One-axis sensitivity sweeps.

use std::io::Write;

use kdiff::datasets::Dataset;
use kdiff::metrics::Scores;
use serde::Serialize;

use crate::config::{Algorithm, Axis, ClusterParams, DensityParams, Grid};
use crate::error::CliError;
use crate::pipeline::run_on;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub pairwise: Scores,
    pub bcubed: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Row with the largest pairwise F, earliest on ties.
    pub fn best(&self) -> &SweepRow {
        self.rows
            .iter()
            .reduce(|a, b| if b.pairwise.f > a.pairwise.f { b } else { a })
            .expect("sweep tables are never empty")
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "{},pairwise_precision,pairwise_recall,pairwise_f,bcubed_precision,bcubed_recall,bcubed_f",
            self.axis.as_str()
        )?;
        for r in &self.rows {
            let (p, b) = (r.pairwise, r.bcubed);
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.value, p.precision, p.recall, p.f, b.precision, b.recall, b.f
            )?;
        }
        Ok(())
    }
}

fn check_axis(axis: Axis, dp: &DensityParams, cp: &ClusterParams) -> Result<(), CliError> {
    let dbscan = cp.algorithm == Algorithm::Dbscan;
    let relevant = match axis {
        Axis::Eps => dp.choice.needs_eps() || dbscan,
        Axis::K => dp.choice.needs_k(),
        Axis::H => dp.choice.uses_h(),
        Axis::C => !dbscan,
        Axis::CoreThreshold => dbscan,
    };
    if relevant {
        Ok(())
    } else {
        Err(CliError::validation(
            "grid",
            format!("axis `{}` has no effect on this density and algorithm", axis.as_str()),
        ))
    }
}

pub fn sweep(ds: &Dataset, dp: &DensityParams, cp: &ClusterParams, grid: &Grid) -> Result<SweepTable, CliError> {
    if grid.values.is_empty() {
        return Err(CliError::validation("grid", "must contain at least one value"));
    }
    check_axis(grid.axis, dp, cp)?;
    let rows = grid
        .values
        .iter()
        .map(|&value| {
            let (mut dp, mut cp) = (*dp, *cp);
            dp.set(grid.axis, value);
            cp.set(grid.axis, value);
            let eval = run_on(ds, &dp, &cp)?
                .eval
                .ok_or_else(|| CliError::validation("label_column", "a sweep needs ground-truth labels"))?;
            Ok(SweepRow {
                value,
                pairwise: eval.pairwise,
                bcubed: eval.bcubed,
            })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(SweepTable { axis: grid.axis, rows })
}
