//! Labeled point sets: CSV ingestion, feature standardization and seeded
//! Gaussian-mixture sampling.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n x d` matrix of finite feature values, stored row-major, with
/// optional dense ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    n: usize,
    d: usize,
    points: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, rows: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        let d = rows.first().map(Vec::len).ok_or(Error::EmptyDataset)?;
        let mut points = Vec::with_capacity(rows.len() * d);
        for (row, values) in rows.iter().enumerate() {
            if values.len() != d {
                return Err(Error::RaggedRow {
                    row,
                    found: values.len(),
                    expected: d,
                });
            }
            points.extend_from_slice(values);
        }
        Self::from_flat(name, d, points, labels)
    }

    pub fn from_flat(name: impl Into<String>, d: usize, points: Vec<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        if d == 0 || points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !points.len().is_multiple_of(d) {
            return Err(Error::param("points", "length is not a multiple of the dimension"));
        }
        let n = points.len() / d;
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonNumeric {
                row: pos / d,
                column: pos % d,
                value: points[pos].to_string(),
            });
        }
        if let Some(l) = &labels {
            Error::check_len("labels", l.len(), n)?;
        }
        Ok(Dataset {
            name: name.into(),
            n,
            d,
            points,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.points.chunks_exact(self.d)
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of distinct ground-truth classes, if labeled.
    pub fn num_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| l.iter().max().map_or(0, |m| m + 1))
    }

    /// Seeded subsample of `n` rows without replacement; row order follows the
    /// original indices.
    pub fn subsample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 || n > self.n {
            return Err(Error::param("n", format!("subsample size {n} outside 1..={}", self.n)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample(&mut rng, self.n, n).into_vec();
        idx.sort_unstable();
        let mut points = Vec::with_capacity(n * self.d);
        for &i in &idx {
            points.extend_from_slice(self.row(i));
        }
        let labels = self.labels.as_ref().map(|l| relabel_dense(idx.iter().map(|&i| l[i])));
        Dataset::from_flat(format!("{}[{n}]", self.name), self.d, points, labels)
    }
}

fn relabel_dense(labels: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .map(|l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Which CSV column holds the ground-truth label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    None,
    Index(usize),
    Name(String),
    Last,
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// `none`, `last`, a zero-based column index, or a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "" | "none" => LabelColumn::None,
            "last" => LabelColumn::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        })
    }
}

/// Reads a comma-separated file with an optional header row.
///
/// The first row is taken as a header when the label column is selected by
/// name or when any of its feature cells fails to parse as a number. Labels
/// may be arbitrary strings and are re-encoded to `0..c` in order of first
/// appearance.
pub fn load_dataset(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    read_dataset(name, file, label_column)
}

pub fn read_dataset(
    name: impl Into<String>,
    reader: impl std::io::Read,
    label_column: &LabelColumn,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr
        .records()
        .filter(|r| r.as_ref().map_or(true, |r| !(r.len() == 1 && r[0].is_empty())));

    let first = match records.next() {
        Some(r) => r?,
        None => return Err(Error::EmptyDataset),
    };
    let width = first.len();
    let label_idx = match label_column {
        LabelColumn::None => None,
        LabelColumn::Last => Some(width - 1),
        LabelColumn::Index(i) if *i < width => Some(*i),
        LabelColumn::Index(i) => return Err(Error::LabelColumnMissing(i.to_string())),
        LabelColumn::Name(n) => Some(
            first
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::LabelColumnMissing(n.clone()))?,
        ),
    };
    let is_feature = |c: usize| Some(c) != label_idx;
    let has_header = matches!(label_column, LabelColumn::Name(_))
        || first
            .iter()
            .enumerate()
            .any(|(c, v)| is_feature(c) && v.parse::<f64>().is_err());

    let d = width - usize::from(label_idx.is_some());
    if d == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut points = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let data_rows = (!has_header).then_some(Ok(first)).into_iter().chain(records);
    for (row, rec) in data_rows.enumerate() {
        let rec = rec?;
        if rec.len() != width {
            return Err(Error::RaggedRow {
                row,
                found: rec.len(),
                expected: width,
            });
        }
        for (column, cell) in rec.iter().enumerate() {
            if !is_feature(column) {
                raw_labels.push(cell.to_string());
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => points.push(v),
                _ => {
                    return Err(Error::NonNumeric {
                        row,
                        column,
                        value: cell.to_string(),
                    })
                }
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let labels = label_idx.map(|_| {
        let mut map: HashMap<&str, usize> = HashMap::new();
        raw_labels
            .iter()
            .map(|s| {
                let next = map.len();
                *map.entry(s.as_str()).or_insert(next)
            })
            .collect()
    });
    Dataset::from_flat(name, d, points, labels)
}

/// Rescales each column to mean 0 and population standard deviation 1.
/// Columns whose values are all identical become all zeros.
pub fn standardize(ds: &Dataset) -> Dataset {
    let (n, d) = (ds.n, ds.d);
    let mut points = ds.points.clone();
    for c in 0..d {
        let col = || ds.points.iter().skip(c).step_by(d).copied();
        let (lo, hi) = col().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if lo == hi {
            points.iter_mut().skip(c).step_by(d).for_each(|v| *v = 0.0);
            continue;
        }
        let mean = col().sum::<f64>() / n as f64;
        let var = col().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        points.iter_mut().skip(c).step_by(d).for_each(|v| *v = (*v - mean) / sd);
    }
    Dataset { points, ..ds.clone() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Isotropic variance shared by every coordinate.
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmSpec {
    pub components: Vec<GmmComponent>,
    pub n: usize,
    pub seed: u64,
}

impl GmmSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GmmSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .components
            .first()
            .ok_or_else(|| Error::param("components", "at least one component required"))?;
        let d = first.mean.len();
        if d == 0 {
            return Err(Error::param("mean", "dimension must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::param("n", "sample count must be positive"));
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 || self.components.iter().any(|c| c.weight.is_nan() || c.weight < 0.0) {
            return Err(Error::param(
                "weights",
                format!("must be nonnegative and sum to 1, got {total}"),
            ));
        }
        for c in &self.components {
            if !(c.variance > 0.0 && c.variance.is_finite()) {
                return Err(Error::param(
                    "variance",
                    format!("must be positive, got {}", c.variance),
                ));
            }
            if c.mean.len() != d {
                return Err(Error::param("mean", "all components need the same dimension"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.mean.len())
    }
}

/// Draws `spec.n` points; each point's label is the index of the component
/// that produced it. Identical specs yield bit-identical datasets.
pub fn sample_gmm(spec: &GmmSpec) -> Result<Dataset> {
    spec.validate()?;
    let d = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points = Vec::with_capacity(spec.n * d);
    let mut labels = Vec::with_capacity(spec.n);
    let last = spec.components.len() - 1;
    for _ in 0..spec.n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let comp = spec
            .components
            .iter()
            .position(|c| {
                acc += c.weight;
                u < acc
            })
            .unwrap_or(last);
        let c = &spec.components[comp];
        let sd = c.variance.sqrt();
        for &m in &c.mean {
            let z: f64 = rng.sample(StandardNormal);
            points.push(m + sd * z);
        }
        labels.push(comp);
    }
    Dataset::from_flat("gmm", d, points, Some(labels))
}
