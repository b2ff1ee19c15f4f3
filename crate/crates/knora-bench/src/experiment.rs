//! End-to-end experiment runner: ingest datasets, build fold plans, train
//! pools, run every configured technique on every test sample, and
//! aggregate AUCs into a report.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use knora::dataset::{Dataset, ImbalanceSummary};
use knora::loaders::{load_csv, load_keel};
use knora::normalize::minmax_normalize;
use knora::perceptron::PerceptronConfig;
use knora::pool::{bagging_pool, build_oracle_matrix, BaggingConfig};
use knora::region::knn_region;
use knora::selection::{combine_votes, SelectionContext, Technique};
use knora::split::{derive_seed, stratified_nested_split, Replication};
use knora::stats::{auc, ScoredPredictions};
use knora::DesTechnique;

use crate::config::{DatasetSource, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::report::{DatasetReport, ExperimentReport, SkippedReplication};
use crate::synthetic::{generate_blobs, SyntheticSpec};

/// A dataset ready to run: raw data plus its imbalance summary.
pub struct LoadedDataset {
    pub source: String,
    pub dataset: Dataset,
    pub summary: ImbalanceSummary,
}

/// Loads every configured source. File extensions select the parser:
/// `.dat` is KEEL, anything else is CSV.
pub fn load_sources(sources: &[DatasetSource]) -> Result<Vec<LoadedDataset>> {
    let mut loaded = Vec::with_capacity(sources.len());
    for source in sources {
        let dataset = match source {
            DatasetSource::File { path, label_column } => {
                let is_keel = path
                    .extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("dat"));
                let result = if is_keel {
                    load_keel(path)
                } else {
                    let column = label_column.clone().unwrap_or_else(|| "class".to_string());
                    load_csv(path, column.as_str())
                };
                result.map_err(|e| {
                    HarnessError::Data(format!("failed to load '{}': {e}", path.display()))
                })?
            }
            DatasetSource::Synthetic { synthetic } => generate_blobs(synthetic)?,
        };
        let summary = ImbalanceSummary::of(&dataset)
            .map_err(|e| HarnessError::Data(format!("{}: {e}", source.describe())))?;
        loaded.push(LoadedDataset {
            source: source.describe(),
            dataset,
            summary,
        });
    }
    Ok(loaded)
}

/// Conventions baked into the harness that the underlying protocol leaves
/// open. Echoed into every report so results are self-describing.
pub fn harness_conventions() -> Vec<String> {
    vec![
        "features are min-max scaled to [0,1] using statistics fitted on the training fold only".into(),
        "the minority class is the less frequent label; ties break to the lexicographically smaller label".into(),
        "the minority class is the positive/scored class; vote ties go to it".into(),
        "the AUC ranking score of a sample is its minority-class vote fraction".into(),
        "single-class bootstrap bags train constant classifiers for that class".into(),
        "f-prefixed techniques use a simplified frienemy pre-selection rule, not the full FIRE-DES framework".into(),
        "the region size k is clamped to the validation-fold size when the fold is smaller than k".into(),
        "replications whose test fold lacks a class are skipped and reported, never imputed".into(),
    ]
}

enum RepOutcome {
    /// One AUC per configured technique.
    Scores(Vec<f64>),
    Skipped(String),
}

fn run_replication(
    loaded: &LoadedDataset,
    replication: &Replication,
    techniques: &[Technique],
    cfg: &ExperimentConfig,
    pool_seed: u64,
) -> Result<RepOutcome> {
    let d = &loaded.dataset;
    let test = d.subset(&replication.test);
    if test.classes().len() < 2 {
        return Ok(RepOutcome::Skipped("test fold lacks a class".into()));
    }
    let train = d.subset(&replication.train);
    let validation = d.subset(&replication.validation);

    let (train_norm, scaler) = minmax_normalize(&train);
    let validation_norm = scaler.transform(&validation)?;
    let test_norm = scaler.transform(&test)?;

    let minority = &loaded.summary.minority;
    let majority = &loaded.summary.majority;
    let bagging = BaggingConfig {
        pool_size: cfg.pool_size,
        perceptron: PerceptronConfig {
            epochs: cfg.epochs,
            learning_rate: cfg.learning_rate,
        },
    };
    let pool = bagging_pool(&train_norm, minority, majority, &bagging, pool_seed)?;
    let oracle = build_oracle_matrix(&pool, &validation_norm)?;
    let k = cfg.k.min(validation_norm.len());

    let mut scores: Vec<Vec<f64>> = vec![Vec::with_capacity(test_norm.len()); techniques.len()];
    for i in 0..test_norm.len() {
        let query = test_norm.row(i);
        let region = knn_region(query, &validation_norm, k)?;
        let ctx = SelectionContext {
            oracle: &oracle,
            region: &region,
            validation: &validation_norm,
            minority,
        };
        for (scores, technique) in scores.iter_mut().zip(techniques) {
            let ensemble = technique.select(&ctx);
            let (_, score) = combine_votes(&ensemble, &pool, query)?;
            scores.push(score);
        }
    }

    let mut aucs = Vec::with_capacity(techniques.len());
    for technique_scores in scores {
        let predictions =
            ScoredPredictions::new(technique_scores, test.labels().to_vec(), minority.clone())?;
        aucs.push(auc(&predictions)?);
    }
    Ok(RepOutcome::Scores(aucs))
}

/// Runs the full protocol for `cfg` with its configured techniques.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let techniques = cfg.parsed_techniques()?;
    run_experiment_with(cfg, &techniques)
}

/// Runs the protocol with an explicit technique list (the plugin entry
/// point: anything implementing name/select semantics of [`Technique`]).
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    techniques: &[Technique],
) -> Result<ExperimentReport> {
    cfg.validate()?;
    if techniques.is_empty() {
        return Err(HarnessError::Config(
            "at least one technique is required".into(),
        ));
    }
    let technique_names: Vec<String> = techniques.iter().map(|t| t.name()).collect();
    let loaded = load_sources(&cfg.datasets)?;

    // One fold plan per dataset, derived from the master seed.
    let mut plans = Vec::with_capacity(loaded.len());
    for (idx, entry) in loaded.iter().enumerate() {
        let plan_seed = derive_seed(cfg.seed, idx as u64);
        let plan =
            stratified_nested_split(&entry.dataset, cfg.outer_folds, cfg.inner_folds, plan_seed)
                .map_err(|e| HarnessError::Data(format!("{}: {e}", entry.source)))?;
        plans.push(plan);
    }

    // Flatten (dataset, replication) jobs and run them in parallel. Results
    // are re-keyed by job index, so scheduling cannot affect the report.
    let jobs: Vec<(usize, usize)> = plans
        .iter()
        .enumerate()
        .flat_map(|(d, plan)| (0..plan.replications.len()).map(move |r| (d, r)))
        .collect();
    let outcomes: Vec<RepOutcome> = jobs
        .par_iter()
        .map(|&(d, r)| {
            let pool_seed = derive_seed(derive_seed(cfg.seed, d as u64), 1000 + r as u64);
            run_replication(
                &loaded[d],
                &plans[d].replications[r],
                techniques,
                cfg,
                pool_seed,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    // Aggregate per dataset in canonical order.
    let mut dataset_reports = Vec::with_capacity(loaded.len());
    let mut outcome_iter = outcomes.into_iter();
    for (d, entry) in loaded.iter().enumerate() {
        let n_reps = plans[d].replications.len();
        let mut auc_by_technique: BTreeMap<String, Vec<f64>> = technique_names
            .iter()
            .map(|n| (n.clone(), Vec::new()))
            .collect();
        let mut completed = Vec::new();
        let mut skipped = Vec::new();
        for rep_idx in 0..n_reps {
            match outcome_iter.next().expect("one outcome per job") {
                RepOutcome::Scores(aucs) => {
                    completed.push(rep_idx);
                    for (name, value) in technique_names.iter().zip(aucs) {
                        auc_by_technique
                            .get_mut(name)
                            .expect("known technique")
                            .push(value);
                    }
                }
                RepOutcome::Skipped(reason) => {
                    eprintln!(
                        "warning: {} replication {rep_idx} skipped: {reason}",
                        entry.source
                    );
                    skipped.push(SkippedReplication {
                        replication: rep_idx,
                        reason,
                    });
                }
            }
        }
        if completed.is_empty() {
            return Err(HarnessError::Data(format!(
                "{}: every replication was skipped",
                entry.source
            )));
        }
        let mean_auc: BTreeMap<String, f64> = auc_by_technique
            .iter()
            .map(|(name, values)| {
                (
                    name.clone(),
                    values.iter().sum::<f64>() / values.len() as f64,
                )
            })
            .collect();
        dataset_reports.push(DatasetReport {
            name: entry.dataset.name().to_string(),
            source: entry.source.clone(),
            n_samples: entry.dataset.len(),
            n_features: entry.dataset.n_features(),
            imbalance_ratio: entry.summary.ir,
            minority: entry.summary.minority.to_string(),
            replications_run: completed.len(),
            replications_skipped: skipped.len(),
            completed_replications: completed,
            skipped,
            auc: auc_by_technique,
            mean_auc,
        });
    }

    ExperimentReport::assemble(cfg, technique_names, dataset_reports)
}

/// Collects selection traces for the first few test samples of the first
/// replication of every dataset, as JSON lines. Diagnostic surface behind
/// the CLI `--traces` flag; kept off the hot path.
pub fn sample_traces(cfg: &ExperimentConfig, per_dataset_limit: usize) -> Result<String> {
    cfg.validate()?;
    let techniques = cfg.parsed_techniques()?;
    let loaded = load_sources(&cfg.datasets)?;
    let mut out = String::new();
    for (idx, entry) in loaded.iter().enumerate() {
        let plan_seed = derive_seed(cfg.seed, idx as u64);
        let plan =
            stratified_nested_split(&entry.dataset, cfg.outer_folds, cfg.inner_folds, plan_seed)
                .map_err(|e| HarnessError::Data(format!("{}: {e}", entry.source)))?;
        let rep = &plan.replications[0];
        let train = entry.dataset.subset(&rep.train);
        let validation = entry.dataset.subset(&rep.validation);
        let test = entry.dataset.subset(&rep.test);
        let (train_norm, scaler) = minmax_normalize(&train);
        let validation_norm = scaler.transform(&validation)?;
        let test_norm = scaler.transform(&test)?;
        let pool = bagging_pool(
            &train_norm,
            &entry.summary.minority,
            &entry.summary.majority,
            &BaggingConfig {
                pool_size: cfg.pool_size,
                perceptron: PerceptronConfig {
                    epochs: cfg.epochs,
                    learning_rate: cfg.learning_rate,
                },
            },
            derive_seed(derive_seed(cfg.seed, idx as u64), 1000),
        )?;
        let oracle = build_oracle_matrix(&pool, &validation_norm)?;
        let k = cfg.k.min(validation_norm.len());
        for i in 0..test_norm.len().min(per_dataset_limit) {
            let query = test_norm.row(i);
            let region = knn_region(query, &validation_norm, k)?;
            let ctx = SelectionContext {
                oracle: &oracle,
                region: &region,
                validation: &validation_norm,
                minority: &entry.summary.minority,
            };
            for technique in &techniques {
                let (ensemble, trace) = technique.select_traced(&ctx);
                let line = serde_json::json!({
                    "dataset": entry.dataset.name(),
                    "test_sample": i,
                    "technique": trace.technique,
                    "iterations": trace.iterations,
                    "fallback_used": trace.fallback_used,
                    "selected": ensemble.members,
                });
                out.push_str(&line.to_string());
                out.push('\n');
            }
        }
    }
    Ok(out)
}

/// Measures sustained per-test-sample selection throughput (region search,
/// selection, and vote) for one technique on a synthetic workload with the
/// protocol defaults (pool of 100, k = 7). Returns selections per second.
pub fn measure_selection_rate(technique: Technique, n_queries: usize) -> Result<f64> {
    let spec = SyntheticSpec {
        name: "throughput".into(),
        n: 400,
        features: 5,
        ir: 9.0,
        separation: 1.5,
        seed: 11,
    };
    let data = generate_blobs(&spec)?;
    let summary = ImbalanceSummary::of(&data)?;
    let plan = stratified_nested_split(&data, 5, 4, 1)?;
    let rep = &plan.replications[0];
    let train = data.subset(&rep.train);
    let validation = data.subset(&rep.validation);
    let test = data.subset(&rep.test);
    let (train_norm, scaler) = minmax_normalize(&train);
    let validation_norm = scaler.transform(&validation)?;
    let test_norm = scaler.transform(&test)?;
    let pool = bagging_pool(
        &train_norm,
        &summary.minority,
        &summary.majority,
        &BaggingConfig::default(),
        3,
    )?;
    let oracle = build_oracle_matrix(&pool, &validation_norm)?;

    let start = Instant::now();
    let mut sink = 0.0f64;
    for q in 0..n_queries {
        let query = test_norm.row(q % test_norm.len());
        let region = knn_region(query, &validation_norm, 7)?;
        let ctx = SelectionContext {
            oracle: &oracle,
            region: &region,
            validation: &validation_norm,
            minority: &summary.minority,
        };
        let ensemble = technique.select(&ctx);
        let (_, score) = combine_votes(&ensemble, &pool, query)?;
        sink += score;
    }
    let elapsed = start.elapsed().as_secs_f64();
    std::hint::black_box(sink);
    Ok(n_queries as f64 / elapsed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            seed: 5,
            k: 7,
            pool_size: 10,
            epochs: 20,
            learning_rate: 0.1,
            techniques: vec![
                "knora-u".into(),
                "knora-e".into(),
                "knora-b".into(),
                "knora-bi".into(),
            ],
            datasets: vec![DatasetSource::Synthetic {
                synthetic: SyntheticSpec {
                    name: "tiny-blobs".into(),
                    n: 80,
                    features: 3,
                    ir: 3.0,
                    separation: 1.5,
                    seed: 2,
                },
            }],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn tiny_experiment_produces_twenty_replications() {
        let report = run_experiment(&tiny_config()).unwrap();
        assert_eq!(report.datasets.len(), 1);
        let d = &report.datasets[0];
        assert_eq!(d.replications_run + d.replications_skipped, 20);
        for values in d.auc.values() {
            assert_eq!(values.len(), d.replications_run);
            for v in values {
                assert!((0.0..=1.0).contains(v));
            }
        }
    }

    #[test]
    fn same_seed_gives_identical_reports() {
        let cfg = tiny_config();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn single_classifier_pool_makes_all_techniques_agree() {
        let mut cfg = tiny_config();
        cfg.pool_size = 1;
        let report = run_experiment(&cfg).unwrap();
        let d = &report.datasets[0];
        let reference = &d.auc["knora-e"];
        for name in ["knora-u", "knora-b", "knora-bi"] {
            assert_eq!(&d.auc[name], reference, "{name} diverged with pool_size=1");
        }
    }
}
