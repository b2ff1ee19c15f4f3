//! Benchmark harness for the `knora` dynamic ensemble selection library:
//! experiment configuration, synthetic data generation, the end-to-end
//! evaluation protocol, report emission, the built-in divergence scenario,
//! and naive reference selectors for differential testing.

pub mod config;
pub mod error;
pub mod experiment;
pub mod reference;
pub mod report;
pub mod scenario;
pub mod synthetic;

pub use config::{DatasetSource, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use experiment::{
    harness_conventions, load_sources, measure_selection_rate, run_experiment, run_experiment_with,
    sample_traces, LoadedDataset,
};
pub use report::{emit_report, DatasetReport, ExperimentReport, SummaryReport};
pub use scenario::{scenario_divergence, trace_json_lines, ScenarioOutcome, ScenarioReport};
pub use synthetic::{bundled_suite, generate_blobs, write_csv, write_keel, SyntheticSpec};
