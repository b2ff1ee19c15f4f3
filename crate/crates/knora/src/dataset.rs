//! Binary classification dataset representation.
//!
//! A [`Dataset`] is a dense feature matrix with one categorical label per
//! row. All selection machinery in this crate works on binary problems, so
//! loaders enforce exactly two distinct labels; subsets produced by
//! [`Dataset::subset`] (folds, bootstrap bags) may transiently contain a
//! single class.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A categorical class label. Equality is exact string equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassLabel(String);

impl ClassLabel {
    pub fn new(value: impl Into<String>) -> Self {
        ClassLabel(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ClassLabel {
    fn from(s: &str) -> Self {
        ClassLabel(s.to_string())
    }
}

/// Dense N x F feature matrix plus per-row labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    /// Row-major storage, `n_rows * n_features` values.
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<ClassLabel>,
}

impl Dataset {
    /// Builds a dataset and checks the loader-level invariants: at least two
    /// rows, at least one feature, all values finite, exactly two classes.
    pub fn new(
        name: impl Into<String>,
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<ClassLabel>,
    ) -> Result<Self> {
        let d = Self::from_parts(name, features, n_features, labels)?;
        if d.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "dataset needs at least 2 rows, got {}",
                d.len()
            )));
        }
        let classes = d.classes();
        if classes.len() != 2 {
            return Err(Error::NonBinaryLabels {
                found: classes.len(),
            });
        }
        Ok(d)
    }

    /// Builds a dataset checking only structural consistency (shape and
    /// finiteness). Used for subsets, which may be single-class.
    pub fn from_parts(
        name: impl Into<String>,
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<ClassLabel>,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::InvalidInput("n_features must be >= 1".into()));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::InvalidInput(format!(
                "feature buffer holds {} values, expected {} rows x {} features",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature {
                row: pos / n_features,
                column: (pos % n_features).to_string(),
            });
        }
        Ok(Dataset {
            name: name.into(),
            features,
            n_features,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of feature columns.
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Feature vector of row `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn label(&self, i: usize) -> &ClassLabel {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features)
    }

    /// Distinct labels in ascending order.
    pub fn classes(&self) -> Vec<ClassLabel> {
        let mut classes: Vec<ClassLabel> = self.labels.to_vec();
        classes.sort();
        classes.dedup();
        classes
    }

    /// Per-class row counts.
    pub fn class_counts(&self) -> BTreeMap<ClassLabel, usize> {
        let mut counts = BTreeMap::new();
        for label in &self.labels {
            *counts.entry(label.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Materializes the given rows (in order, duplicates allowed) as a new
    /// dataset. Used for CV folds and bootstrap bags, so the result is not
    /// re-checked for the two-class invariant.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i].clone());
        }
        Dataset {
            name: self.name.clone(),
            features,
            n_features: self.n_features,
            labels,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Dataset {
        self.name = name.into();
        self
    }
}

/// Class balance summary: counts, designated minority class, and the
/// majority/minority imbalance ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceSummary {
    pub counts: BTreeMap<ClassLabel, usize>,
    pub minority: ClassLabel,
    pub majority: ClassLabel,
    /// majority count / minority count, >= 1.
    pub ir: f64,
}

impl ImbalanceSummary {
    /// Computes counts and designates the minority class. When counts tie,
    /// the lexicographically smaller label is the minority.
    pub fn of(dataset: &Dataset) -> Result<Self> {
        let counts = dataset.class_counts();
        if counts.len() != 2 {
            return Err(Error::NonBinaryLabels {
                found: counts.len(),
            });
        }
        let mut entries: Vec<(&ClassLabel, usize)> = counts.iter().map(|(l, &c)| (l, c)).collect();
        // BTreeMap iterates labels in ascending order, so a stable sort by
        // count leaves the lexicographically smaller label first on ties.
        entries.sort_by_key(|&(_, c)| c);
        let minority = entries[0].0.clone();
        let majority = entries[1].0.clone();
        let ir = entries[1].1 as f64 / entries[0].1 as f64;
        Ok(ImbalanceSummary {
            counts,
            minority,
            majority,
            ir,
        })
    }
}
