//! Min-max feature scaling fitted on training data.
//!
//! KNN regions are built from Euclidean distances, so features must be on
//! commensurate scales. The scaler is fitted on the training partition only
//! and its parameters are reused to transform validation and test data,
//! which may therefore fall outside [0, 1].

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Per-column affine map `x -> (x - min) / (max - min)`. Constant columns
/// (max == min) map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl MinMaxScaler {
    /// Learns column minima and maxima from `train`.
    pub fn fit(train: &Dataset) -> Self {
        let f = train.n_features();
        let mut mins = vec![f64::INFINITY; f];
        let mut maxs = vec![f64::NEG_INFINITY; f];
        for row in train.rows() {
            for (j, &v) in row.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        MinMaxScaler { mins, maxs }
    }

    /// Applies the learned map to every row of `d`.
    pub fn transform(&self, d: &Dataset) -> Result<Dataset> {
        if d.n_features() != self.mins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mins.len(),
                got: d.n_features(),
            });
        }
        let mut features = Vec::with_capacity(d.len() * d.n_features());
        for row in d.rows() {
            for (j, &v) in row.iter().enumerate() {
                features.push(self.transform_value(j, v));
            }
        }
        Dataset::from_parts(d.name(), features, d.n_features(), d.labels().to_vec())
    }

    /// Applies the learned map to a single feature vector.
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mins.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| self.transform_value(j, v))
            .collect())
    }

    fn transform_value(&self, col: usize, v: f64) -> f64 {
        let span = self.maxs[col] - self.mins[col];
        if span == 0.0 {
            0.0
        } else {
            (v - self.mins[col]) / span
        }
    }
}

/// Fits a scaler on `d` and returns the transformed dataset together with
/// the fitted parameters.
pub fn minmax_normalize(d: &Dataset) -> (Dataset, MinMaxScaler) {
    let scaler = MinMaxScaler::fit(d);
    let normalized = scaler
        .transform(d)
        .expect("scaler fitted on the same dataset always matches its shape");
    (normalized, scaler)
}
