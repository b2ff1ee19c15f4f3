//! Synthetic imbalanced Gaussian-blob datasets and dataset file writers.
//!
//! The generator ships with the harness so the benchmark suite runs
//! without external data: two isotropic Gaussian classes whose means sit
//! `separation` apart, with class sizes set by the imbalance ratio. Small
//! separations produce the overlapping, indecision-heavy borderline
//! regions the selectors differ on.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use knora::dataset::{ClassLabel, Dataset};

use crate::error::{HarnessError, Result};

pub const MAJORITY_LABEL: &str = "negative";
pub const MINORITY_LABEL: &str = "positive";

/// Parameters of one synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub name: String,
    /// Total number of samples.
    pub n: usize,
    /// Feature dimensionality.
    #[serde(default = "default_features")]
    pub features: usize,
    /// Majority/minority imbalance ratio.
    pub ir: f64,
    /// Euclidean distance between the class means, in units of the
    /// per-class standard deviation (1.0).
    #[serde(default = "default_separation")]
    pub separation: f64,
    pub seed: u64,
}

fn default_features() -> usize {
    5
}

fn default_separation() -> f64 {
    1.5
}

/// Draws the dataset described by `spec`. Majority rows come first, then
/// minority rows; labels are "negative" / "positive".
pub fn generate_blobs(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.n < 4 {
        return Err(HarnessError::Config(format!(
            "synthetic dataset '{}' needs n >= 4",
            spec.name
        )));
    }
    if spec.ir < 1.0 {
        return Err(HarnessError::Config(format!(
            "synthetic dataset '{}' needs ir >= 1",
            spec.name
        )));
    }
    if spec.features == 0 {
        return Err(HarnessError::Config(format!(
            "synthetic dataset '{}' needs at least one feature",
            spec.name
        )));
    }

    let n_minority = ((spec.n as f64 / (1.0 + spec.ir)).round() as usize).max(2);
    let n_majority = spec.n - n_minority;
    let offset = spec.separation / (spec.features as f64).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut features = Vec::with_capacity(spec.n * spec.features);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..n_majority {
        for _ in 0..spec.features {
            features.push(normal.sample(&mut rng));
        }
        labels.push(ClassLabel::new(MAJORITY_LABEL));
    }
    for _ in 0..n_minority {
        for _ in 0..spec.features {
            features.push(offset + normal.sample(&mut rng));
        }
        labels.push(ClassLabel::new(MINORITY_LABEL));
    }

    Dataset::new(spec.name.clone(), features, spec.features, labels)
        .map_err(|e| HarnessError::Data(e.to_string()))
}

/// The bundled benchmark suite: imbalance ratios from 2 to 30, five
/// generator seeds each, all at separation 2.0 where the classes overlap
/// enough that borderline regions are common. Sixty datasets total.
pub fn bundled_suite() -> Vec<SyntheticSpec> {
    const IRS: [u64; 12] = [2, 3, 4, 5, 7, 9, 12, 15, 18, 22, 26, 30];
    let mut specs = Vec::with_capacity(60);
    for s in 1..=5u64 {
        for ir in IRS {
            specs.push(SyntheticSpec {
                name: format!("blobs-ir{ir}-s{s}"),
                n: 400,
                features: 5,
                ir: ir as f64,
                separation: 2.0,
                seed: 1000 * s + ir,
            });
        }
    }
    specs
}

/// Writes a dataset in KEEL `.dat` layout. Feature values are printed with
/// the shortest round-trip representation, so reloading reproduces the
/// dataset exactly.
pub fn write_keel(dataset: &Dataset, path: &Path) -> Result<()> {
    let f = dataset.n_features();
    let mut out = String::new();
    writeln!(out, "@relation {}", dataset.name()).unwrap();
    for col in 0..f {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for row in dataset.rows() {
            lo = lo.min(row[col]);
            hi = hi.max(row[col]);
        }
        writeln!(out, "@attribute f{} real [{}, {}]", col + 1, lo, hi).unwrap();
    }
    let classes = dataset.classes();
    let class_list: Vec<&str> = classes.iter().map(|c| c.as_str()).collect();
    writeln!(out, "@attribute class {{{}}}", class_list.join(", ")).unwrap();
    let input_names: Vec<String> = (1..=f).map(|i| format!("f{i}")).collect();
    writeln!(out, "@inputs {}", input_names.join(", ")).unwrap();
    writeln!(out, "@outputs class").unwrap();
    writeln!(out, "@data").unwrap();
    for (row, label) in dataset.rows().zip(dataset.labels()) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}, {}", cells.join(", "), label).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes a dataset as CSV with headers `f1..fF,class`.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let f = dataset.n_features();
    let mut writer = csv::Writer::from_path(path).map_err(|e| HarnessError::Data(e.to_string()))?;
    let mut header: Vec<String> = (1..=f).map(|i| format!("f{i}")).collect();
    header.push("class".to_string());
    writer
        .write_record(&header)
        .map_err(|e| HarnessError::Data(e.to_string()))?;
    for (row, label) in dataset.rows().zip(dataset.labels()) {
        let mut record: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        record.push(label.to_string());
        writer
            .write_record(&record)
            .map_err(|e| HarnessError::Data(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}
