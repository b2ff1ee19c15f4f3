//! Dynamic ensemble selection with the K-Nearest Oracles family.
//!
//! For every test sample a region of competence (its K nearest neighbors in
//! a validation set) is built, and a subset of a bagged classifier pool is
//! selected from the classifiers' correctness on that region:
//!
//! * [`selection::select_knora_u`] - every classifier correct on at least
//!   one region sample, weighted by how many it gets right.
//! * [`selection::select_knora_e`] - classifiers correct on the whole
//!   region, shrinking it from the furthest neighbor until someone
//!   qualifies.
//! * [`selection::select_knora_b`] - like KNORA-E, but the reduction never
//!   removes the last sample of a class represented in the region.
//! * [`selection::select_knora_bi`] - protects only the minority class
//!   during reduction, for imbalanced problems.
//!
//! The crate also ships the supporting pieces: KEEL/CSV ingestion, min-max
//! scaling, nested stratified cross-validation, bagged perceptron pools
//! with a precomputed oracle matrix, and the evaluation statistics (AUC,
//! Wilcoxon signed-rank test, sign test, average ranks) used to compare
//! techniques.
//!
//! ```no_run
//! use knora::{
//!     bagging_pool, build_oracle_matrix, combine_votes, knn_region,
//!     minmax_normalize, select_knora_bi, stratified_nested_split,
//!     BaggingConfig, ImbalanceSummary,
//! };
//!
//! let data = knora::load_keel("data/glass1.dat")?;
//! let summary = ImbalanceSummary::of(&data)?;
//! let plan = stratified_nested_split(&data, 5, 4, 42)?;
//! let rep = &plan.replications[0];
//!
//! let (train, scaler) = minmax_normalize(&data.subset(&rep.train));
//! let validation = scaler.transform(&data.subset(&rep.validation))?;
//! let pool = bagging_pool(
//!     &train,
//!     &summary.minority,
//!     &summary.majority,
//!     &BaggingConfig::default(),
//!     7,
//! )?;
//! let oracle = build_oracle_matrix(&pool, &validation)?;
//!
//! let query = scaler.transform_row(data.row(rep.test[0]))?;
//! let region = knn_region(&query, &validation, 7)?;
//! let ensemble = select_knora_bi(&oracle, &region, &validation, &summary.minority);
//! let (label, score) = combine_votes(&ensemble, &pool, &query)?;
//! println!("{label} ({score:.2})");
//! # Ok::<(), knora::Error>(())
//! ```

pub mod dataset;
pub mod error;
pub mod loaders;
pub mod normalize;
pub mod perceptron;
pub mod pool;
pub mod region;
pub mod selection;
pub mod split;
pub mod stats;

pub use dataset::{ClassLabel, Dataset, ImbalanceSummary};
pub use error::{Error, Result};
pub use loaders::{load_csv, load_keel, LabelColumn};
pub use normalize::{minmax_normalize, MinMaxScaler};
pub use perceptron::{train_perceptron, LinearClassifier, PerceptronConfig};
pub use pool::{bagging_pool, build_oracle_matrix, BaggingConfig, ClassifierPool, OracleMatrix};
pub use region::{
    is_indecision_region, knn_region, reduce_region_b, reduce_region_bi, RegionClassProfile,
    RegionOfCompetence,
};
pub use selection::{
    combine_votes, fallback_best_accuracy, preselect_dfp, select_knora_b, select_knora_bi,
    select_knora_e, select_knora_u, DesTechnique, EnsembleMember, SelectedEnsemble,
    SelectionContext, SelectionTrace, Technique, TechniqueKind,
};
pub use split::{derive_seed, stratified_nested_split, FoldPlan, Replication};
pub use stats::{
    auc, average_ranks, sign_test, sign_test_critical, wilcoxon_signed_rank, PairwiseVerdict,
    ScoredPredictions, Verdict, WinTieLoss,
};
