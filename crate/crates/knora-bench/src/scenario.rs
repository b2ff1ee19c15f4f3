//! Built-in 2-D fixture where KNORA-E and KNORA-B diverge.
//!
//! Five validation neighbors A..E surround a query of class "circle" at
//! strictly increasing distances 1..5, labeled circle only at C. Classifier
//! c1 separates A from everything else (correct exactly on A and C);
//! classifier c2 separates {A, B, C} from {D, E} (correct exactly on A and
//! B, and calls the query "square").
//!
//! No classifier is correct on the whole region, so both eliminate-style
//! selectors shrink it: after removing E and D, KNORA-E drops C - the last
//! circle - and selects c2, which misclassifies the query; KNORA-B spares C,
//! drops B instead, and selects c1, which classifies the query correctly.
//! KNORA-BI sides with KNORA-B when circle is the minority class and with
//! KNORA-E when square is.

use serde::{Deserialize, Serialize};

use knora::dataset::{ClassLabel, Dataset};
use knora::perceptron::LinearClassifier;
use knora::pool::{build_oracle_matrix, ClassifierPool};
use knora::region::knn_region;
use knora::selection::{
    combine_votes, select_knora_b_traced, select_knora_bi_traced, select_knora_e_traced,
    SelectionTrace,
};

use crate::error::Result;

pub const CIRCLE: &str = "circle";
pub const SQUARE: &str = "square";

/// Outcome of one technique on the fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub technique: String,
    pub selected_classifiers: Vec<usize>,
    pub predicted: String,
    /// Whether the prediction matches the query's true class ("circle").
    pub correct: bool,
    pub trace: SelectionTrace,
}

/// The four technique runs on the divergence fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    /// Neighbor labels ordered nearest first (A..E).
    pub neighbor_labels: Vec<String>,
    pub query_class: String,
    pub knora_e: ScenarioOutcome,
    pub knora_b: ScenarioOutcome,
    pub knora_bi_minority_circle: ScenarioOutcome,
    pub knora_bi_minority_square: ScenarioOutcome,
}

fn circle() -> ClassLabel {
    ClassLabel::new(CIRCLE)
}

fn square() -> ClassLabel {
    ClassLabel::new(SQUARE)
}

/// The fixture's validation set: A(1,0) B(0,2) C(-3,0) D(0,-4) E(-4,-3) at
/// distances 1..5 from the origin query.
fn validation_set() -> Dataset {
    let features = vec![
        1.0, 0.0, // A, square
        0.0, 2.0, // B, square
        -3.0, 0.0, // C, circle
        0.0, -4.0, // D, square
        -4.0, -3.0, // E, square
    ];
    let labels = vec![square(), square(), circle(), square(), square()];
    Dataset::new("divergence-fixture", features, 2, labels).expect("fixture is well-formed")
}

/// c1: square iff x >= 0.5 (correct exactly on A and C); c2: square iff
/// y >= -1 (correct exactly on A and B).
fn classifier_pool() -> ClassifierPool {
    let c1 = LinearClassifier::new(vec![1.0, 0.0], -0.5, square(), circle());
    let c2 = LinearClassifier::new(vec![0.0, 1.0], 1.0, square(), circle());
    ClassifierPool::from_classifiers(vec![c1, c2], vec![0, 1], square(), circle())
        .expect("fixture pool is well-formed")
}

/// Runs KNORA-E, KNORA-B, and both minority designations of KNORA-BI on
/// the fixture and returns their traces.
pub fn scenario_divergence() -> Result<ScenarioReport> {
    let validation = validation_set();
    let pool = classifier_pool();
    let oracle = build_oracle_matrix(&pool, &validation)?;
    let query = [0.0, 0.0];
    let region = knn_region(&query, &validation, 5)?;

    let outcome = |technique: &str,
                   (ensemble, trace): (knora::SelectedEnsemble, SelectionTrace)|
     -> Result<ScenarioOutcome> {
        let (predicted, _) = combine_votes(&ensemble, &pool, &query)?;
        Ok(ScenarioOutcome {
            technique: technique.to_string(),
            selected_classifiers: ensemble.classifier_indices(),
            correct: predicted == circle(),
            predicted: predicted.to_string(),
            trace,
        })
    };

    Ok(ScenarioReport {
        neighbor_labels: region
            .neighbor_indices()
            .iter()
            .map(|&i| validation.label(i).to_string())
            .collect(),
        query_class: CIRCLE.to_string(),
        knora_e: outcome(
            "knora-e",
            select_knora_e_traced(&oracle, &region, &validation),
        )?,
        knora_b: outcome(
            "knora-b",
            select_knora_b_traced(&oracle, &region, &validation),
        )?,
        knora_bi_minority_circle: outcome(
            "knora-bi (minority = circle)",
            select_knora_bi_traced(&oracle, &region, &validation, &circle()),
        )?,
        knora_bi_minority_square: outcome(
            "knora-bi (minority = square)",
            select_knora_bi_traced(&oracle, &region, &validation, &square()),
        )?,
    })
}

/// Renders traces as JSON lines (one object per iteration, then one
/// summary object per technique).
pub fn trace_json_lines(report: &ScenarioReport) -> String {
    let mut out = String::new();
    for outcome in [
        &report.knora_e,
        &report.knora_b,
        &report.knora_bi_minority_circle,
        &report.knora_bi_minority_square,
    ] {
        for it in &outcome.trace.iterations {
            let line = serde_json::json!({
                "technique": outcome.technique,
                "iteration": it.iteration,
                "region": it.region,
                "selected": it.selected,
                "removed": it.removed,
                "remaining_classes": it.remaining_classes,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        let summary = serde_json::json!({
            "technique": outcome.technique,
            "selected_classifiers": outcome.selected_classifiers,
            "predicted": outcome.predicted,
            "correct": outcome.correct,
            "fallback_used": outcome.trace.fallback_used,
        });
        out.push_str(&summary.to_string());
        out.push('\n');
    }
    out
}
