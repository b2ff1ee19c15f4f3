//! Linear base classifiers trained with the classic perceptron rule.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};

/// A linear decision rule `w . x + b`. Predicts the positive label iff the
/// raw score is >= 0 (ties go to the positive class).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub positive_label: ClassLabel,
    pub negative_label: ClassLabel,
}

impl LinearClassifier {
    pub fn new(
        weights: Vec<f64>,
        bias: f64,
        positive_label: ClassLabel,
        negative_label: ClassLabel,
    ) -> Self {
        LinearClassifier {
            weights,
            bias,
            positive_label,
            negative_label,
        }
    }

    /// Raw decision score `w . x + b`, exposed for diagnostics.
    pub fn raw_score(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn predicts_positive(&self, x: &[f64]) -> bool {
        self.raw_score(x) >= 0.0
    }

    pub fn predict(&self, x: &[f64]) -> &ClassLabel {
        if self.predicts_positive(x) {
            &self.positive_label
        } else {
            &self.negative_label
        }
    }
}

/// Perceptron training hyperparameters. The defaults (100 epochs, learning
/// rate 0.1, zero-initialized weights) are fixed for reproducibility and
/// exposed as configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptronConfig {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for PerceptronConfig {
    fn default() -> Self {
        PerceptronConfig {
            epochs: 100,
            learning_rate: 0.1,
        }
    }
}

/// Trains a perceptron on `train`, shuffling the sample order each epoch
/// with an RNG seeded by `seed`.
///
/// The update is `w <- w + lr * y * x` (and `b <- b + lr * y`) on every
/// sample whose prediction is wrong, with y in {-1, +1}. Training stops
/// early once an epoch makes no mistakes. A single-class bag yields the
/// constant classifier for that class: zero weights and a bias of +/-1.
pub fn train_perceptron(
    train: &Dataset,
    positive: &ClassLabel,
    negative: &ClassLabel,
    config: &PerceptronConfig,
    seed: u64,
) -> Result<LinearClassifier> {
    if train.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }

    let mut targets = Vec::with_capacity(train.len());
    for label in train.labels() {
        if label == positive {
            targets.push(1.0);
        } else if label == negative {
            targets.push(-1.0);
        } else {
            return Err(Error::InvalidInput(format!(
                "label '{label}' is neither '{positive}' nor '{negative}'"
            )));
        }
    }

    let n_features = train.n_features();
    if targets.iter().all(|&y| y > 0.0) {
        return Ok(LinearClassifier::new(
            vec![0.0; n_features],
            1.0,
            positive.clone(),
            negative.clone(),
        ));
    }
    if targets.iter().all(|&y| y < 0.0) {
        return Ok(LinearClassifier::new(
            vec![0.0; n_features],
            -1.0,
            positive.clone(),
            negative.clone(),
        ));
    }

    let mut weights = vec![0.0; n_features];
    let mut bias = 0.0;
    let lr = config.learning_rate;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut mistakes = 0usize;
        for &i in &order {
            let x = train.row(i);
            let score: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias;
            let predicted_positive = score >= 0.0;
            let y = targets[i];
            if predicted_positive != (y > 0.0) {
                for (w, &v) in weights.iter_mut().zip(x) {
                    *w += lr * y * v;
                }
                bias += lr * y;
                mistakes += 1;
            }
        }
        if mistakes == 0 {
            break;
        }
    }

    Ok(LinearClassifier::new(
        weights,
        bias,
        positive.clone(),
        negative.clone(),
    ))
}
