//! Ground set, class probabilities, margin weights and distance metrics.

mod io;

pub use io::{load_embeddings, load_probabilities, load_weights, write_csv, Format, LoadOptions};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{cmp_finite, Scalar};

/// Default tolerance on probability row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DistanceMetric {
    /// `1 - cos(a, b)`, range `[0, 2]`.
    #[default]
    Cosine,
    Euclidean,
    Manhattan,
}

impl DistanceMetric {
    pub fn name(self) -> &'static str {
        match self {
            DistanceMetric::Cosine => "cosine",
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::Manhattan => "manhattan",
        }
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" | "cosine-distance" => Ok(DistanceMetric::Cosine),
            "euclidean" | "l2" => Ok(DistanceMetric::Euclidean),
            "manhattan" | "l1" => Ok(DistanceMetric::Manhattan),
            other => Err(Error::InvalidConfig(format!("unknown metric {other:?}"))),
        }
    }
}

/// The ground set: `n` points with `dim` finite coordinates each, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet<T> {
    n: usize,
    dim: usize,
    features: Vec<T>,
    norms: Vec<T>,
    labels: Option<Vec<i64>>,
}

impl<T: Scalar> EmbeddingSet<T> {
    /// Builds a set from a flat row-major buffer.
    pub fn from_flat(features: Vec<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        if features.is_empty() {
            return Err(Error::EmptyInput {
                what: "embedding set".into(),
            });
        }
        if features.len() % dim != 0 {
            return Err(Error::RaggedRow {
                row: features.len() / dim,
                expected: dim,
                found: features.len() % dim,
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        let n = features.len() / dim;
        let norms = features
            .chunks_exact(dim)
            .map(|row| row.iter().map(|&v| v * v).sum::<T>().sqrt())
            .collect();
        Ok(Self {
            n,
            dim,
            features,
            norms,
            labels: None,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::EmptyInput {
            what: "embedding set".into(),
        })?;
        let dim = first.len();
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for (row, values) in rows.iter().enumerate() {
            if values.len() != dim {
                return Err(Error::RaggedRow {
                    row,
                    expected: dim,
                    found: values.len(),
                });
            }
            flat.extend_from_slice(values);
        }
        Self::from_flat(flat, dim)
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::LengthMismatch {
                what: "labels".into(),
                expected: self.n,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn features(&self) -> &[T] {
        &self.features
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Copies the given rows into a new set, preserving their order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut flat = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            self.check_index(i)?;
            flat.extend_from_slice(self.row(i));
        }
        Self::from_flat(flat, self.dim)
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                n: self.n,
            })
        }
    }

    /// Fails if the metric is undefined on some row (zero vectors under cosine).
    pub fn check_metric(&self, metric: DistanceMetric) -> Result<()> {
        if metric == DistanceMetric::Cosine {
            if let Some(index) = self.norms.iter().position(|&nrm| nrm == T::zero()) {
                return Err(Error::ZeroVectorCosine { index });
            }
        }
        Ok(())
    }

    /// Distance between rows `i` and `j`. The caller must have validated the
    /// metric with [`EmbeddingSet::check_metric`].
    #[inline]
    pub fn distance(&self, i: usize, j: usize, metric: DistanceMetric) -> T {
        if i == j {
            return T::zero();
        }
        let (a, b) = (self.row(i), self.row(j));
        match metric {
            DistanceMetric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x - y) * (x - y))
                .sum::<T>()
                .sqrt(),
            DistanceMetric::Manhattan => a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum(),
            DistanceMetric::Cosine => {
                let dot: T = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
                let sim = dot / (self.norms[i] * self.norms[j]);
                (T::one() - sim).max(T::zero()).min(T::lit(2.0))
            }
        }
    }
}

/// Checked distance between two points of a set.
pub fn pairwise_distance<T: Scalar>(
    set: &EmbeddingSet<T>,
    a: usize,
    b: usize,
    metric: DistanceMetric,
) -> Result<T> {
    set.check_index(a)?;
    set.check_index(b)?;
    if metric == DistanceMetric::Cosine {
        for idx in [a, b] {
            if set.norms[idx] == T::zero() {
                return Err(Error::ZeroVectorCosine { index: idx });
            }
        }
    }
    Ok(set.distance(a, b, metric))
}

/// Per-point class probabilities, one row per point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix<T> {
    rows: usize,
    classes: usize,
    values: Vec<T>,
}

impl<T: Scalar> ProbabilityMatrix<T> {
    /// Validates entries in `[0,1]` and row sums within `tolerance` of 1.
    /// Rows are never renormalized.
    pub fn new(values: Vec<T>, classes: usize, tolerance: f64) -> Result<Self> {
        if classes < 2 {
            return Err(Error::TooFewClasses { classes });
        }
        if values.is_empty() {
            return Err(Error::EmptyInput {
                what: "probability matrix".into(),
            });
        }
        if values.len() % classes != 0 {
            return Err(Error::RaggedRow {
                row: values.len() / classes,
                expected: classes,
                found: values.len() % classes,
            });
        }
        for (row, chunk) in values.chunks_exact(classes).enumerate() {
            for (col, &p) in chunk.iter().enumerate() {
                if !p.is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
                if p < T::zero() || p > T::one() {
                    return Err(Error::ProbabilityOutOfRange {
                        row,
                        col,
                        value: p.as_f64(),
                    });
                }
            }
            let sum = chunk.iter().map(|p| p.as_f64()).sum::<f64>();
            if (sum - 1.0).abs() > tolerance {
                return Err(Error::RowSumMismatch { row, sum });
            }
        }
        Ok(Self {
            rows: values.len() / classes,
            classes,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let classes = rows.first().map_or(0, Vec::len);
        if classes < 2 {
            return Err(Error::TooFewClasses { classes });
        }
        let mut flat = Vec::with_capacity(rows.len() * classes);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != classes {
                return Err(Error::RaggedRow {
                    row,
                    expected: classes,
                    found: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::new(flat, classes, ROW_SUM_TOLERANCE)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.classes..(i + 1) * self.classes]
    }
}

/// Per-point margin weights; small weight means an uncertain point.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(index) = values.iter().position(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::InvalidWeight {
                index,
                value: values[index].as_f64(),
            });
        }
        Ok(Self { values })
    }

    pub fn uniform(n: usize, value: T) -> Result<Self> {
        Self::new(vec![value; n])
    }

    #[inline]
    pub fn get(&self, i: usize) -> T {
        self.values[i]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum of weights over `indices`, accumulated in ascending index order so
    /// that equal sets always produce bit-identical sums.
    pub fn total(&self, indices: &[usize]) -> T {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.into_iter().map(|i| self.values[i]).sum()
    }

    /// Indices ordered by `(weight, index)` ascending.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| cmp_finite(self.values[a], self.values[b]).then(a.cmp(&b)));
        order
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.values.len() == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                what: "weights".into(),
                expected: n,
                found: self.values.len(),
            })
        }
    }
}

/// Margin between the best and second-best class probability of each row.
/// Ties between classes resolve to the lower class index.
pub fn margin_weights<T: Scalar>(probs: &ProbabilityMatrix<T>) -> Result<WeightVector<T>> {
    if probs.classes < 2 {
        return Err(Error::TooFewClasses {
            classes: probs.classes,
        });
    }
    let values = (0..probs.rows)
        .map(|i| {
            let row = probs.row(i);
            let mut best = 0;
            for c in 1..row.len() {
                if row[c] > row[best] {
                    best = c;
                }
            }
            let mut second: Option<usize> = None;
            for c in (0..row.len()).filter(|&c| c != best) {
                if second.is_none_or(|s| row[c] > row[s]) {
                    second = Some(c);
                }
            }
            row[best] - row[second.expect("at least two classes")]
        })
        .collect();
    WeightVector::new(values)
}
