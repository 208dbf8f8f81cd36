//! Pairwise dissimilarities between taxa.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{TraitMatrix, TraitVector};

/// Dissimilarity between two trait vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// Count of differing traits.
    Hamming,
    /// Proportion of differing traits.
    #[default]
    HammingNormalized,
    /// One minus shared presences over joint presences.
    Jaccard,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Hamming => "hamming",
            Metric::HammingNormalized => "hamming-normalized",
            Metric::Jaccard => "jaccard",
        }
    }

    pub fn distance(self, a: &TraitVector, b: &TraitVector) -> Result<f64> {
        match self {
            Metric::Hamming => hamming_distance(a, b, false),
            Metric::HammingNormalized => hamming_distance(a, b, true),
            Metric::Jaccard => jaccard_distance(a, b),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamming" => Ok(Metric::Hamming),
            "hamming-normalized" => Ok(Metric::HammingNormalized),
            "jaccard" => Ok(Metric::Jaccard),
            other => Err(Error::Config(format!(
                "unknown metric `{other}` (expected hamming, hamming-normalized or jaccard)"
            ))),
        }
    }
}

fn check_lengths(a: &TraitVector, b: &TraitVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "trait vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

pub fn hamming_distance(a: &TraitVector, b: &TraitVector, normalized: bool) -> Result<f64> {
    check_lengths(a, b)?;
    let diff = a
        .bits()
        .iter()
        .zip(b.bits())
        .filter(|(x, y)| x != y)
        .count() as f64;
    if normalized && !a.is_empty() {
        Ok(diff / a.len() as f64)
    } else {
        Ok(diff)
    }
}

/// `1 - |a & b| / |a | b|`, with two all-zero vectors at distance 0.
pub fn jaccard_distance(a: &TraitVector, b: &TraitVector) -> Result<f64> {
    check_lengths(a, b)?;
    let (mut both, mut either) = (0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        both += usize::from(x && y);
        either += usize::from(x || y);
    }
    if either == 0 {
        return Ok(0.0);
    }
    Ok(1.0 - both as f64 / either as f64)
}

/// Dense symmetric dissimilarity matrix over labelled taxa.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates and wraps a square matrix given as rows.
    ///
    /// The diagonal must be zero, every entry finite and non-negative, and the
    /// matrix symmetric up to a relative 1e-12; the stored matrix is exactly
    /// symmetric (upper triangle wins).
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!(
                "distance matrix must be {n}×{n} to match its labels"
            )));
        }
        let mut values = Vec::with_capacity(n * n);
        for row in &rows {
            values.extend_from_slice(row);
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() {
                    return Err(Error::Validation(format!("non-finite distance at ({i},{j})")));
                }
                if v < 0.0 {
                    return Err(Error::Validation(format!("negative distance at ({i},{j})")));
                }
            }
            if values[i * n + i] != 0.0 {
                return Err(Error::Validation(format!("non-zero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Validation(format!(
                        "asymmetric distance at ({i},{j}): {a} vs {b}"
                    )));
                }
                values[j * n + i] = a;
            }
        }
        check_unique_labels(&labels)?;
        Ok(Self { labels, values })
    }

    /// Builds a matrix from a function evaluated on the upper triangle.
    pub fn from_fn(labels: Vec<String>, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let n = labels.len();
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        Self::new(labels, rows)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.labels.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.labels.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    /// Matrix over taxa `order[0], order[1], ...`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        crate::seriation::check_permutation(order, self.len())?;
        let labels = order.iter().map(|&i| self.labels[i].clone()).collect();
        let n = order.len();
        let mut values = vec![0.0; n * n];
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                values[a * n + b] = self.get(i, j);
            }
        }
        Ok(Self { labels, values })
    }

    /// Same matrix with rows and columns arranged to follow `labels`.
    pub fn reorder_by_labels(&self, labels: &[String]) -> Result<Self> {
        let order = labels
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| Error::Validation(format!("unknown label `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.permuted(&order)
    }

    /// Largest absolute entrywise difference; labels must agree.
    pub fn max_abs_diff(&self, other: &DistanceMatrix) -> Result<f64> {
        if self.labels != other.labels {
            return Err(Error::Validation("distance matrices have different labels".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Same matrix with every entry multiplied by `factor` (must be ≥ 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::Validation(format!("invalid scale factor {factor}")));
        }
        Ok(Self {
            labels: self.labels.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        })
    }
}

pub(crate) fn check_unique_labels(labels: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::Validation(format!("duplicate taxon label `{l}`")));
        }
    }
    Ok(())
}

/// Distances between every pair of rows of `m`. Rows are computed in
/// parallel; each cell is evaluated independently, so the result does not
/// depend on scheduling.
pub fn distance_matrix(m: &TraitMatrix, metric: Metric) -> Result<DistanceMatrix> {
    if m.is_empty() {
        return Err(Error::EmptyInput("trait matrix has no taxa".into()));
    }
    let n = m.n_taxa();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Ok(0.0)
                    } else {
                        metric.distance(m.row(i), m.row(j))
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    DistanceMatrix::new(m.taxa().to_vec(), rows)
}

/// `taxon,<label…>` header, then one row per taxon: its label followed by
/// the full row of distances in shortest round-trip decimal form.
pub fn format_distance_csv(d: &DistanceMatrix) -> Result<String> {
    let err = |e: csv::Error| Error::Validation(format!("csv write: {e}"));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(std::iter::once("taxon").chain(d.labels().iter().map(String::as_str)))
        .map_err(err)?;
    for (i, label) in d.labels().iter().enumerate() {
        let cells = std::iter::once(label.clone()).chain(d.row(i).iter().map(|v| v.to_string()));
        w.write_record(cells).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Validation(e.to_string()))
}

pub fn parse_distance_csv(text: &str) -> Result<DistanceMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::EmptyInput("distance CSV is empty".into())),
    };
    if header.get(0) != Some("taxon") {
        return Err(Error::parse(1, "header must start with `taxon`"));
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::with_capacity(labels.len());
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(line, e.to_string()))?;
        if rec.len() != labels.len() + 1 {
            return Err(Error::parse(line, format!("expected {} cells", labels.len() + 1)));
        }
        if rows.len() >= labels.len() || rec.get(0) != Some(labels[rows.len()].as_str()) {
            return Err(Error::parse(line, "row labels must follow the header order"));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(line, format!("`{c}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} rows for {} labels",
            rows.len(),
            labels.len()
        )));
    }
    DistanceMatrix::new(labels, rows)
}

pub fn read_distance_csv(path: impl AsRef<std::path::Path>) -> Result<DistanceMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_distance_csv(&text)
}

pub fn write_distance_csv(d: &DistanceMatrix, path: impl AsRef<std::path::Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_distance_csv(d)?).map_err(|e| Error::io(path, e))
}
