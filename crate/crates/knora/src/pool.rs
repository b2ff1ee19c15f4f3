//! Bagged classifier pools and the precomputed oracle (competence) matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};
use crate::perceptron::{train_perceptron, LinearClassifier, PerceptronConfig};

/// An ordered pool of linear classifiers. Selection results reference
/// indices into this order, so it never changes after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierPool {
    classifiers: Vec<LinearClassifier>,
    bag_seeds: Vec<u64>,
    positive_label: ClassLabel,
    negative_label: ClassLabel,
}

/// Versioned on-disk layout for pool caching.
#[derive(Serialize, Deserialize)]
struct PoolFile {
    format: String,
    version: u32,
    positive_label: ClassLabel,
    negative_label: ClassLabel,
    bag_seeds: Vec<u64>,
    classifiers: Vec<LinearClassifier>,
}

const POOL_FORMAT: &str = "knora-pool";
const POOL_VERSION: u32 = 1;

impl ClassifierPool {
    pub fn from_classifiers(
        classifiers: Vec<LinearClassifier>,
        bag_seeds: Vec<u64>,
        positive_label: ClassLabel,
        negative_label: ClassLabel,
    ) -> Result<Self> {
        if classifiers.is_empty() {
            return Err(Error::InvalidInput(
                "pool must hold at least one classifier".into(),
            ));
        }
        if bag_seeds.len() != classifiers.len() {
            return Err(Error::InvalidInput(
                "bag_seeds length must match the number of classifiers".into(),
            ));
        }
        Ok(ClassifierPool {
            classifiers,
            bag_seeds,
            positive_label,
            negative_label,
        })
    }

    pub fn len(&self) -> usize {
        self.classifiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classifiers.is_empty()
    }

    pub fn classifier(&self, i: usize) -> &LinearClassifier {
        &self.classifiers[i]
    }

    pub fn classifiers(&self) -> &[LinearClassifier] {
        &self.classifiers
    }

    pub fn bag_seeds(&self) -> &[u64] {
        &self.bag_seeds
    }

    /// The label scored as positive by every classifier in the pool (the
    /// minority class under the harness convention).
    pub fn positive_label(&self) -> &ClassLabel {
        &self.positive_label
    }

    pub fn negative_label(&self) -> &ClassLabel {
        &self.negative_label
    }

    /// Serializes the pool to the versioned JSON cache layout.
    pub fn to_json(&self) -> String {
        let file = PoolFile {
            format: POOL_FORMAT.to_string(),
            version: POOL_VERSION,
            positive_label: self.positive_label.clone(),
            negative_label: self.negative_label.clone(),
            bag_seeds: self.bag_seeds.clone(),
            classifiers: self.classifiers.clone(),
        };
        serde_json::to_string_pretty(&file).expect("pool serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: PoolFile = serde_json::from_str(json)
            .map_err(|e| Error::InvalidInput(format!("invalid pool JSON: {e}")))?;
        if file.format != POOL_FORMAT {
            return Err(Error::InvalidInput(format!(
                "unexpected pool format '{}'",
                file.format
            )));
        }
        if file.version != POOL_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported pool version {}",
                file.version
            )));
        }
        Self::from_classifiers(
            file.classifiers,
            file.bag_seeds,
            file.positive_label,
            file.negative_label,
        )
    }
}

/// Bagging configuration: pool size plus the shared perceptron
/// hyperparameters. Bootstrap bags have the same size as the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingConfig {
    pub pool_size: usize,
    pub perceptron: PerceptronConfig,
}

impl Default for BaggingConfig {
    fn default() -> Self {
        BaggingConfig {
            pool_size: 100,
            perceptron: PerceptronConfig::default(),
        }
    }
}

fn bootstrap_indices(n: usize, bag_seed: u64) -> (Vec<usize>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(bag_seed);
    let indices = (0..n).map(|_| rng.random_range(0..n)).collect();
    let train_seed = rng.random::<u64>();
    (indices, train_seed)
}

/// Trains a bagged pool of perceptrons on `train`.
///
/// Classifier `i` is trained on a bootstrap sample drawn with replacement
/// from `train` using bag seed `seed + i`; the epoch-shuffle seed for the
/// perceptron is drawn from the same stream, so the whole pool is a pure
/// function of `(train, config, seed)`.
pub fn bagging_pool(
    train: &Dataset,
    positive: &ClassLabel,
    negative: &ClassLabel,
    config: &BaggingConfig,
    seed: u64,
) -> Result<ClassifierPool> {
    if train.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    if config.pool_size == 0 {
        return Err(Error::InvalidInput("pool_size must be at least 1".into()));
    }

    let mut classifiers = Vec::with_capacity(config.pool_size);
    let mut bag_seeds = Vec::with_capacity(config.pool_size);
    for i in 0..config.pool_size {
        let bag_seed = seed.wrapping_add(i as u64);
        let (indices, train_seed) = bootstrap_indices(train.len(), bag_seed);
        let bag = train.subset(&indices);
        let classifier =
            train_perceptron(&bag, positive, negative, &config.perceptron, train_seed)?;
        classifiers.push(classifier);
        bag_seeds.push(bag_seed);
    }

    ClassifierPool::from_classifiers(classifiers, bag_seeds, positive.clone(), negative.clone())
}

/// M x V correctness matrix: entry (i, j) is true iff classifier `i`
/// correctly classifies validation sample `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMatrix {
    correct: Vec<bool>,
    n_classifiers: usize,
    validation_size: usize,
}

impl OracleMatrix {
    pub fn from_rows(rows: Vec<Vec<bool>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidInput(
                "oracle matrix must be non-empty".into(),
            ));
        }
        let validation_size = rows[0].len();
        if rows.iter().any(|r| r.len() != validation_size) {
            return Err(Error::InvalidInput(
                "oracle matrix rows differ in length".into(),
            ));
        }
        let n_classifiers = rows.len();
        Ok(OracleMatrix {
            correct: rows.into_iter().flatten().collect(),
            n_classifiers,
            validation_size,
        })
    }

    pub fn n_classifiers(&self) -> usize {
        self.n_classifiers
    }

    pub fn validation_size(&self) -> usize {
        self.validation_size
    }

    pub fn is_correct(&self, classifier: usize, sample: usize) -> bool {
        self.correct[classifier * self.validation_size + sample]
    }

    pub fn row(&self, classifier: usize) -> &[bool] {
        let start = classifier * self.validation_size;
        &self.correct[start..start + self.validation_size]
    }

    /// True iff `classifier` is correct on every listed sample.
    pub fn correct_on_all(&self, classifier: usize, samples: &[usize]) -> bool {
        let row = self.row(classifier);
        samples.iter().all(|&j| row[j])
    }

    /// Number of listed samples `classifier` gets right.
    pub fn correct_count(&self, classifier: usize, samples: &[usize]) -> usize {
        let row = self.row(classifier);
        samples.iter().filter(|&&j| row[j]).count()
    }
}

/// Evaluates every pool member on every validation sample.
pub fn build_oracle_matrix(pool: &ClassifierPool, validation: &Dataset) -> Result<OracleMatrix> {
    if validation.is_empty() {
        return Err(Error::InvalidInput("empty validation set".into()));
    }
    let f = validation.n_features();
    if let Some(c) = pool.classifiers().iter().find(|c| c.weights.len() != f) {
        return Err(Error::DimensionMismatch {
            expected: c.weights.len(),
            got: f,
        });
    }

    let v = validation.len();
    let mut correct = Vec::with_capacity(pool.len() * v);
    for classifier in pool.classifiers() {
        for j in 0..v {
            correct.push(classifier.predict(validation.row(j)) == validation.label(j));
        }
    }
    Ok(OracleMatrix {
        correct,
        n_classifiers: pool.len(),
        validation_size: v,
    })
}
