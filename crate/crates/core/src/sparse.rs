use rayon::prelude::*;

/// Compressed sparse rows of a square `n x n` matrix. Column indices are
/// strictly increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    /// Builds from per-row `(column, value)` lists; each row is sorted by
    /// column. Duplicate columns within a row are not allowed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(j, _)| j);
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0), "duplicate column");
            for (j, v) in row {
                debug_assert!(j < n);
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Csr {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn iter_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (cols, vals) = self.row(i);
        cols.iter().copied().zip(vals.iter().copied())
    }

    /// Stored value at `(i, j)`, if any.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|p| vals[p])
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .into_par_iter()
            .map(|i| self.row(i).1.iter().sum())
            .collect()
    }

    /// Single pass over the stored entries.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&j, &v) in self.indices.iter().zip(&self.values) {
            out[j] += v;
        }
        out
    }

    /// `x^T A` without materializing the transpose.
    pub fn left_mul(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out[j] += xi * v;
            }
        }
    }

    pub fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64 + Sync) -> Csr {
        let mut values = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            values.extend(cols.iter().zip(vals).map(|(&j, &v)| f(i, j, v)));
        }
        Csr { values, ..self.clone() }
    }

    pub fn transpose(&self) -> Csr {
        let mut counts = vec![0usize; self.n + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.n {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n {
            for (j, v) in self.iter_row(i) {
                let slot = next[j];
                indices[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        Csr {
            n: self.n,
            indptr,
            indices,
            values,
        }
    }

    /// `x^T A` computed row-parallel over a precomputed transpose `at`.
    pub fn left_mul_par(at: &Csr, x: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(j, o)| {
            let (rows, vals) = at.row(j);
            *o = rows.iter().zip(vals).map(|(&i, &v)| x[i] * v).sum();
        });
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.iter_row(i) {
                row[j] = v;
            }
        }
        out
    }
}
