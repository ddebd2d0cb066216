//! Stationary distributions: power iteration (the kd density) and a dense
//! linear-solve oracle.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::chain::chain_structure;
use super::{DensityKind, DensityVector, TransitionMatrix};
use crate::error::{Error, Result};
use crate::sparse::Csr;

/// Largest chain [`stationary_exact`] will densify.
pub const EXACT_SIZE_LIMIT: usize = 5000;

/// Iterations without meaningful progress before a run is declared stalled.
const STALL_WINDOW: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdOptions {
    /// L1 tolerance on the change between successive iterates.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the uniform jump, in `[0, 1)`.
    pub damping: f64,
}

impl Default for KdOptions {
    fn default() -> Self {
        KdOptions {
            tol: 1e-10,
            max_iter: 10_000,
            damping: 0.0,
        }
    }
}

impl KdOptions {
    fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::param("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::param(
                "damping",
                format!("must lie in [0, 1), got {}", self.damping),
            ));
        }
        Ok(())
    }
}

/// Left power iteration `x <- x P` from the uniform vector, optionally mixed
/// with a uniform jump of weight `damping` (never materialized).
///
/// Without damping, a chain with a periodic closed class is rejected up front:
/// its iterates need not settle even when the uniform start happens to be
/// stationary. Reducible aperiodic chains are accepted and yield the limit of
/// the walk started from the uniform distribution. A run whose L1 change fails
/// to shrink over 500 iterations aborts as stalled.
pub fn density_kd(p: &TransitionMatrix, opts: &KdOptions) -> Result<DensityVector> {
    opts.validate()?;
    let n = p.n();
    let mut out = DensityVector::new(Vec::new(), DensityKind::Kd)
        .with("tol", opts.tol)
        .with("max_iter", opts.max_iter as f64)
        .with("damping", opts.damping);
    if opts.damping == 0.0 {
        let structure = chain_structure(p);
        if let Some(c) = structure.periodic_class() {
            return Err(Error::PeriodicChain {
                period: c.period,
                witness: c.witness,
            });
        }
        out = out.with("closed_classes", structure.closed.len() as f64);
    }

    let pt: Csr = p.matrix().transpose();
    let beta = opts.damping;
    let jump = beta / n as f64;
    let mut x = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    let mut history: Vec<f64> = Vec::with_capacity(opts.max_iter.min(1 << 16));
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        Csr::left_mul_par(&pt, &x, &mut y);
        if beta > 0.0 {
            y.iter_mut().for_each(|v| *v = (1.0 - beta) * *v + jump);
        }
        let total: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= total);
        residual = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut y);
        if residual <= opts.tol {
            out.values = x;
            return Ok(out.with("iterations", it as f64).with("residual", residual));
        }
        history.push(residual);
        if it > STALL_WINDOW && residual >= history[it - 1 - STALL_WINDOW] * (1.0 - 1e-9) {
            return Err(Error::Stalled {
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Solves `pi^T (I - P + e g^T) = g^T` with `g` the column sums of `P`, then
/// rescales to sum 1. Requires an irreducible chain of at most
/// [`EXACT_SIZE_LIMIT`] states.
pub fn stationary_exact(p: &TransitionMatrix) -> Result<DensityVector> {
    let n = p.n();
    if n > EXACT_SIZE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: EXACT_SIZE_LIMIT,
        });
    }
    let structure = chain_structure(p);
    if !structure.is_irreducible() {
        return Err(Error::ReducibleChain {
            classes: structure.classes,
        });
    }
    let g = p.matrix().column_sums();
    // A^T pi = g with A = I - P + e g^T, so A^T[j][i] = delta_ij - P[i][j] + g[j]
    let mut at = DMatrix::<f64>::from_fn(n, n, |j, i| if i == j { 1.0 } else { 0.0 } + g[j]);
    for i in 0..n {
        for (j, v) in p.matrix().iter_row(i) {
            at[(j, i)] -= v;
        }
    }
    let pi = at.lu().solve(&DVector::from_column_slice(&g)).ok_or(Error::Singular)?;
    let total: f64 = pi.iter().sum();
    if !total.is_finite() || total == 0.0 {
        return Err(Error::Singular);
    }
    Ok(DensityVector::new(pi.iter().map(|v| v / total).collect(), DensityKind::Kd).with("exact", 1.0))
}
