//! Report aggregation and emission (markdown, CSV, JSON).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use knora::stats::{
    average_ranks, sign_test, sign_test_critical, wilcoxon_signed_rank, WinTieLoss,
};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::harness_conventions;

pub const WILCOXON_ALPHA: f64 = 0.05;
pub const SIGN_TEST_ALPHAS: [f64; 3] = [0.10, 0.05, 0.01];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedReplication {
    pub replication: usize,
    pub reason: String,
}

/// Per-dataset results: raw AUCs per technique (one entry per completed
/// replication, in replication order) plus bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub name: String,
    pub source: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub imbalance_ratio: f64,
    pub minority: String,
    pub replications_run: usize,
    pub replications_skipped: usize,
    pub completed_replications: Vec<usize>,
    pub skipped: Vec<SkippedReplication>,
    pub auc: BTreeMap<String, Vec<f64>>,
    pub mean_auc: BTreeMap<String, f64>,
}

/// One-sided Wilcoxon comparison of technique `a` against `b` over the
/// per-dataset mean AUCs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonComparison {
    pub technique_a: String,
    pub technique_b: String,
    pub p_value: f64,
    pub sign: String,
    pub alpha: f64,
}

/// Sign-test tally of technique `a` against `b` across datasets, with the
/// critical values and verdicts at the standard significance levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTestComparison {
    pub technique_a: String,
    pub technique_b: String,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    pub n_exp: usize,
    /// alpha (as a string key, e.g. "0.05") -> critical value n_c.
    pub critical_values: BTreeMap<String, f64>,
    /// alpha -> "+" / "=" / "-".
    pub verdicts: BTreeMap<String, String>,
}

/// Cross-dataset summary in the shape of the usual results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    /// Mean over datasets of the per-dataset mean AUC.
    pub mean_auc: BTreeMap<String, f64>,
    /// Sample standard deviation of the per-dataset means (0 with a single
    /// dataset).
    pub std_auc: BTreeMap<String, f64>,
    pub average_rank: BTreeMap<String, f64>,
    pub wilcoxon: Vec<WilcoxonComparison>,
    pub sign_tests: Vec<SignTestComparison>,
}

/// Complete, self-describing experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub harness_version: String,
    pub config: ExperimentConfig,
    pub conventions: Vec<String>,
    pub techniques: Vec<String>,
    pub datasets: Vec<DatasetReport>,
    pub summary: SummaryReport,
}

impl ExperimentReport {
    /// Builds the cross-dataset summary from per-dataset results.
    pub fn assemble(
        cfg: &ExperimentConfig,
        techniques: Vec<String>,
        datasets: Vec<DatasetReport>,
    ) -> Result<ExperimentReport> {
        // datasets x techniques matrix of per-dataset mean AUC.
        let matrix: Vec<Vec<f64>> = datasets
            .iter()
            .map(|d| techniques.iter().map(|t| d.mean_auc[t]).collect())
            .collect();

        let n_datasets = datasets.len();
        let mut mean_auc = BTreeMap::new();
        let mut std_auc = BTreeMap::new();
        for (t_idx, name) in techniques.iter().enumerate() {
            let means: Vec<f64> = matrix.iter().map(|row| row[t_idx]).collect();
            let mean = means.iter().sum::<f64>() / n_datasets as f64;
            let std = if n_datasets > 1 {
                (means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
                    / (n_datasets - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            mean_auc.insert(name.clone(), mean);
            std_auc.insert(name.clone(), std);
        }

        let ranks = average_ranks(&matrix).map_err(|e| HarnessError::Data(e.to_string()))?;
        let average_rank: BTreeMap<String, f64> = techniques.iter().cloned().zip(ranks).collect();

        let mut wilcoxon = Vec::new();
        let mut sign_tests = Vec::new();
        for (a_idx, a) in techniques.iter().enumerate() {
            for (b_idx, b) in techniques.iter().enumerate() {
                if a_idx == b_idx {
                    continue;
                }
                let series_a: Vec<f64> = matrix.iter().map(|row| row[a_idx]).collect();
                let series_b: Vec<f64> = matrix.iter().map(|row| row[b_idx]).collect();
                let verdict = wilcoxon_signed_rank(&series_a, &series_b, WILCOXON_ALPHA)
                    .map_err(|e| HarnessError::Data(e.to_string()))?;
                wilcoxon.push(WilcoxonComparison {
                    technique_a: a.clone(),
                    technique_b: b.clone(),
                    p_value: verdict.p_value,
                    sign: verdict.sign.symbol().to_string(),
                    alpha: WILCOXON_ALPHA,
                });

                let wtl = WinTieLoss::from_paired(&series_a, &series_b)
                    .map_err(|e| HarnessError::Data(e.to_string()))?;
                let mut critical_values = BTreeMap::new();
                let mut verdicts = BTreeMap::new();
                for alpha in SIGN_TEST_ALPHAS {
                    let key = format!("{alpha:.2}");
                    let n_c = sign_test_critical(wtl.n_exp(), alpha)
                        .map_err(|e| HarnessError::Data(e.to_string()))?;
                    let v =
                        sign_test(&wtl, alpha).map_err(|e| HarnessError::Data(e.to_string()))?;
                    critical_values.insert(key.clone(), n_c);
                    verdicts.insert(key, v.sign.symbol().to_string());
                }
                sign_tests.push(SignTestComparison {
                    technique_a: a.clone(),
                    technique_b: b.clone(),
                    wins: wtl.wins,
                    ties: wtl.ties,
                    losses: wtl.losses,
                    n_exp: wtl.n_exp(),
                    critical_values,
                    verdicts,
                });
            }
        }

        // The echoed config omits the output destination so report bytes
        // depend only on what was computed.
        let mut config = cfg.clone();
        config.out_dir = None;

        Ok(ExperimentReport {
            harness_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            conventions: harness_conventions(),
            techniques,
            datasets,
            summary: SummaryReport {
                mean_auc,
                std_auc,
                average_rank,
                wilcoxon,
                sign_tests,
            },
        })
    }

    /// Techniques ordered by ascending average rank (best first).
    pub fn ranked_techniques(&self) -> Vec<&String> {
        let mut names: Vec<&String> = self.techniques.iter().collect();
        names.sort_by(|a, b| {
            self.summary.average_rank[*a]
                .partial_cmp(&self.summary.average_rank[*b])
                .expect("ranks are finite")
                .then_with(|| a.cmp(b))
        });
        names
    }

    /// Results table and pairwise tests as markdown.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# Experiment report").unwrap();
        writeln!(out).unwrap();
        writeln!(
            out,
            "seed {} | k {} | pool {} | epochs {} | lr {} | {} dataset(s) | {} technique(s)",
            self.config.seed,
            self.config.k,
            self.config.pool_size,
            self.config.epochs,
            self.config.learning_rate,
            self.datasets.len(),
            self.techniques.len()
        )
        .unwrap();
        writeln!(out).unwrap();
        writeln!(out, "## Overall results").unwrap();
        writeln!(out).unwrap();
        writeln!(out, "| Technique | AUC (std) | Rank |").unwrap();
        writeln!(out, "|---|---|---|").unwrap();
        for name in self.ranked_techniques() {
            writeln!(
                out,
                "| {} | {:.4} ({:.4}) | {:.2} |",
                name,
                self.summary.mean_auc[name],
                self.summary.std_auc[name],
                self.summary.average_rank[name]
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "## Pairwise comparisons").unwrap();
        writeln!(out).unwrap();
        writeln!(
            out,
            "One-sided Wilcoxon signed-rank over per-dataset mean AUC (alpha = {WILCOXON_ALPHA}); sign-test verdicts at alpha = 0.10 / 0.05 / 0.01."
        )
        .unwrap();
        writeln!(out).unwrap();
        writeln!(out, "| A | B | Wilcoxon p | Sign | W/T/L | Sign test |").unwrap();
        writeln!(out, "|---|---|---|---|---|---|").unwrap();
        for (w, s) in self.summary.wilcoxon.iter().zip(&self.summary.sign_tests) {
            let verdicts: Vec<String> = SIGN_TEST_ALPHAS
                .iter()
                .map(|a| s.verdicts[&format!("{a:.2}")].clone())
                .collect();
            writeln!(
                out,
                "| {} | {} | {:.4} | {} | {}/{}/{} | {} |",
                w.technique_a,
                w.technique_b,
                w.p_value,
                w.sign,
                s.wins,
                s.ties,
                s.losses,
                verdicts.join(" ")
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "## Datasets").unwrap();
        writeln!(out).unwrap();
        write!(out, "| Dataset | N | F | IR | reps (skipped)").unwrap();
        for t in &self.techniques {
            write!(out, " | {t}").unwrap();
        }
        writeln!(out, " |").unwrap();
        write!(out, "|---|---|---|---|---").unwrap();
        for _ in &self.techniques {
            write!(out, "|---").unwrap();
        }
        writeln!(out, "|").unwrap();
        for d in &self.datasets {
            write!(
                out,
                "| {} | {} | {} | {:.2} | {} ({})",
                d.name,
                d.n_samples,
                d.n_features,
                d.imbalance_ratio,
                d.replications_run,
                d.replications_skipped
            )
            .unwrap();
            for t in &self.techniques {
                write!(out, " | {:.4}", d.mean_auc[t]).unwrap();
            }
            writeln!(out, " |").unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "## Conventions").unwrap();
        writeln!(out).unwrap();
        for c in &self.conventions {
            writeln!(out, "- {c}").unwrap();
        }
        out
    }

    /// Flat CSV of raw per-replication AUCs:
    /// `dataset,technique,replication,auc`.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(["dataset", "technique", "replication", "auc"])
            .map_err(|e| HarnessError::Data(e.to_string()))?;
        for d in &self.datasets {
            for t in &self.techniques {
                let values = &d.auc[t];
                for (pos, rep_idx) in d.completed_replications.iter().enumerate() {
                    writer
                        .write_record([
                            d.name.as_str(),
                            t.as_str(),
                            &rep_idx.to_string(),
                            &format!("{}", values[pos]),
                        ])
                        .map_err(|e| HarnessError::Data(e.to_string()))?;
                }
            }
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| HarnessError::Data(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Data(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Writes `report.md`, `aucs.csv`, and `report.json` under `out_dir`,
/// creating the directory if needed. Returns the paths written.
pub fn emit_report(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let md = out_dir.join("report.md");
    let csv = out_dir.join("aucs.csv");
    let json = out_dir.join("report.json");
    std::fs::write(&md, report.to_markdown())?;
    std::fs::write(&csv, report.to_csv()?)?;
    std::fs::write(&json, report.to_json())?;
    Ok(vec![md, csv, json])
}
