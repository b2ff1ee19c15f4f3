//! Experiment configuration: a TOML file with CLI flag overrides
//! (flags win).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use knora::selection::Technique;

use crate::error::{HarnessError, Result};
use crate::synthetic::SyntheticSpec;

/// One dataset entry: either a file on disk (KEEL `.dat` or CSV, chosen by
/// extension) or a synthetic generator spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSource {
    File {
        path: PathBuf,
        /// Label column for CSV files (name or index); default "class".
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label_column: Option<String>,
    },
    Synthetic {
        synthetic: SyntheticSpec,
    },
}

impl DatasetSource {
    pub fn describe(&self) -> String {
        match self {
            DatasetSource::File { path, .. } => path.display().to_string(),
            DatasetSource::Synthetic { synthetic } => {
                format!("synthetic:{}", synthetic.name)
            }
        }
    }
}

fn default_seed() -> u64 {
    42
}

fn default_k() -> usize {
    7
}

fn default_pool_size() -> usize {
    100
}

fn default_epochs() -> usize {
    100
}

fn default_learning_rate() -> f64 {
    0.1
}

fn default_outer_folds() -> usize {
    5
}

fn default_inner_folds() -> usize {
    4
}

fn default_techniques() -> Vec<String> {
    vec![
        "knora-u".to_string(),
        "knora-e".to_string(),
        "knora-b".to_string(),
        "knora-bi".to_string(),
    ]
}

/// Resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Region of competence size.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_outer_folds")]
    pub outer_folds: usize,
    #[serde(default = "default_inner_folds")]
    pub inner_folds: usize,
    /// Technique names: knora-u, knora-e, knora-b, knora-bi, plus the
    /// DFP-wrapped f-prefixed variants (fknora-e, ...).
    #[serde(default = "default_techniques")]
    pub techniques: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub datasets: Vec<DatasetSource>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: default_seed(),
            k: default_k(),
            pool_size: default_pool_size(),
            epochs: default_epochs(),
            learning_rate: default_learning_rate(),
            outer_folds: default_outer_folds(),
            inner_folds: default_inner_folds(),
            techniques: default_techniques(),
            out_dir: None,
            datasets: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(format!("cannot read config '{}': {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    /// Parses and validates the technique list, preserving order and
    /// dropping duplicates.
    pub fn parsed_techniques(&self) -> Result<Vec<Technique>> {
        let mut seen = Vec::new();
        for name in &self.techniques {
            let t = Technique::parse(name)
                .ok_or_else(|| HarnessError::Config(format!("unknown technique '{name}'")))?;
            if !seen.contains(&t) {
                seen.push(t);
            }
        }
        if seen.is_empty() {
            return Err(HarnessError::Config(
                "at least one technique is required".into(),
            ));
        }
        Ok(seen)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(HarnessError::Config("k must be at least 1".into()));
        }
        if self.pool_size == 0 {
            return Err(HarnessError::Config("pool_size must be at least 1".into()));
        }
        if self.outer_folds < 2 || self.inner_folds < 2 {
            return Err(HarnessError::Config(
                "outer_folds and inner_folds must both be at least 2".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(HarnessError::Config(
                "learning_rate must be positive".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(HarnessError::Config("epochs must be at least 1".into()));
        }
        if self.datasets.is_empty() {
            return Err(HarnessError::Config(
                "at least one dataset is required".into(),
            ));
        }
        self.parsed_techniques()?;
        Ok(())
    }
}
