//! Dynamic ensemble selection: the K-Nearest Oracles family.
//!
//! Four selectors are provided. KNORA-U takes every classifier that gets at
//! least one region sample right, weighted by how many. KNORA-E demands
//! correctness on the whole region and shrinks it from the furthest
//! neighbor until someone qualifies. KNORA-B shrinks like KNORA-E but never
//! removes the last sample of a class represented in the region; KNORA-BI
//! extends that protection to the minority class only. When a reduction
//! dead-ends, KNORA-E falls back to the best-accuracy tie set on the
//! original region, and KNORA-B/BI fall back to the full KNORA-E procedure
//! on the original region.

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};
use crate::pool::{ClassifierPool, OracleMatrix};
use crate::region::{is_indecision_region, reduce_region_b, reduce_region_bi, RegionOfCompetence};

/// A pool member chosen for the query, with its vote weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub classifier: usize,
    pub weight: u32,
}

/// The ensemble of classifiers selected for one query. Selection never
/// returns an empty ensemble: every selector has a total fallback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedEnsemble {
    pub members: Vec<EnsembleMember>,
}

impl SelectedEnsemble {
    /// Ensemble with unit weights.
    pub fn uniform(classifiers: Vec<usize>) -> Self {
        SelectedEnsemble {
            members: classifiers
                .into_iter()
                .map(|classifier| EnsembleMember {
                    classifier,
                    weight: 1,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn classifier_indices(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.classifier).collect()
    }
}

/// One step of a selector's loop: the region it evaluated, how many
/// classifiers qualified, and which neighbor it removed afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceIteration {
    pub iteration: usize,
    pub region: Vec<usize>,
    pub selected: usize,
    pub removed: Option<usize>,
    pub remaining_classes: Vec<String>,
}

/// Full record of a selection run, for debugging and scenario replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub technique: String,
    pub iterations: Vec<TraceIteration>,
    pub fallback_used: bool,
}

impl SelectionTrace {
    fn new(technique: &str) -> Self {
        SelectionTrace {
            technique: technique.to_string(),
            iterations: Vec::new(),
            fallback_used: false,
        }
    }

    /// Validation indices removed over the run, in removal order.
    pub fn removals(&self) -> Vec<usize> {
        self.iterations.iter().filter_map(|it| it.removed).collect()
    }
}

struct TraceSink<'a> {
    trace: &'a mut SelectionTrace,
    validation: &'a Dataset,
}

impl TraceSink<'_> {
    fn record(&mut self, region: &[usize], selected: usize, removed: Option<usize>) {
        let mut remaining_classes: Vec<String> = region
            .iter()
            .map(|&j| self.validation.label(j).to_string())
            .collect();
        remaining_classes.sort();
        remaining_classes.dedup();
        self.trace.iterations.push(TraceIteration {
            iteration: self.trace.iterations.len() + 1,
            region: region.to_vec(),
            selected,
            removed,
            remaining_classes,
        });
    }
}

fn all_indices(oracle: &OracleMatrix) -> Vec<usize> {
    (0..oracle.n_classifiers()).collect()
}

fn correct_on_all_of(oracle: &OracleMatrix, region: &[usize], candidates: &[usize]) -> Vec<usize> {
    candidates
        .iter()
        .copied()
        .filter(|&i| oracle.correct_on_all(i, region))
        .collect()
}

/// Best-accuracy fallback: every candidate whose accuracy over the
/// original region ties the single best classifier, with unit weights.
pub fn fallback_best_accuracy(
    oracle: &OracleMatrix,
    original_region: &RegionOfCompetence,
) -> SelectedEnsemble {
    fallback_best_accuracy_among(oracle, original_region, &all_indices(oracle))
}

fn fallback_best_accuracy_among(
    oracle: &OracleMatrix,
    original_region: &RegionOfCompetence,
    candidates: &[usize],
) -> SelectedEnsemble {
    let samples = original_region.neighbor_indices();
    let best = candidates
        .iter()
        .map(|&i| oracle.correct_count(i, samples))
        .max()
        .unwrap_or(0);
    SelectedEnsemble::uniform(
        candidates
            .iter()
            .copied()
            .filter(|&i| oracle.correct_count(i, samples) == best)
            .collect(),
    )
}

fn knora_e_among(
    oracle: &OracleMatrix,
    region: &RegionOfCompetence,
    candidates: &[usize],
    mut sink: Option<&mut TraceSink>,
) -> SelectedEnsemble {
    let mut working: Vec<usize> = region.neighbor_indices().to_vec();
    while !working.is_empty() {
        let selected = correct_on_all_of(oracle, &working, candidates);
        let removed = if selected.is_empty() {
            working.last().copied()
        } else {
            None
        };
        if let Some(s) = sink.as_deref_mut() {
            s.record(&working, selected.len(), removed);
        }
        if !selected.is_empty() {
            return SelectedEnsemble::uniform(selected);
        }
        working.pop();
    }
    if let Some(s) = sink {
        s.trace.fallback_used = true;
    }
    fallback_best_accuracy_among(oracle, region, candidates)
}

/// KNORA-Eliminate: classifiers correct on every region sample, shrinking
/// the region from the furthest neighbor until some classifier qualifies;
/// if the region empties, the best-accuracy fallback runs on the original
/// region.
pub fn select_knora_e(oracle: &OracleMatrix, region: &RegionOfCompetence) -> SelectedEnsemble {
    knora_e_among(oracle, region, &all_indices(oracle), None)
}

/// [`select_knora_e`] with a full trace of the run.
pub fn select_knora_e_traced(
    oracle: &OracleMatrix,
    region: &RegionOfCompetence,
    validation: &Dataset,
) -> (SelectedEnsemble, SelectionTrace) {
    let mut trace = SelectionTrace::new("knora-e");
    let ensemble = knora_e_among(
        oracle,
        region,
        &all_indices(oracle),
        Some(&mut TraceSink {
            trace: &mut trace,
            validation,
        }),
    );
    (ensemble, trace)
}

fn knora_u_among(
    oracle: &OracleMatrix,
    region: &RegionOfCompetence,
    candidates: &[usize],
) -> SelectedEnsemble {
    let samples = region.neighbor_indices();
    let members: Vec<EnsembleMember> = candidates
        .iter()
        .filter_map(|&i| {
            let count = oracle.correct_count(i, samples);
            (count > 0).then_some(EnsembleMember {
                classifier: i,
                weight: count as u32,
            })
        })
        .collect();
    if members.is_empty() {
        // No classifier gets anything right: vote with the whole pool.
        return SelectedEnsemble::uniform(candidates.to_vec());
    }
    SelectedEnsemble { members }
}

/// KNORA-Union: classifiers correct on at least one region sample, each
/// weighted by how many samples it gets right. If none qualifies, every
/// classifier votes once.
pub fn select_knora_u(oracle: &OracleMatrix, region: &RegionOfCompetence) -> SelectedEnsemble {
    knora_u_among(oracle, region, &all_indices(oracle))
}

fn knora_borderline_among(
    oracle: &OracleMatrix,
    region: &RegionOfCompetence,
    validation: &Dataset,
    minority: Option<&ClassLabel>,
    candidates: &[usize],
    mut sink: Option<&mut TraceSink>,
) -> SelectedEnsemble {
    let mut working = region.clone();
    while !working.is_empty() {
        let selected = correct_on_all_of(oracle, working.neighbor_indices(), candidates);
        if !selected.is_empty() {
            if let Some(s) = sink.as_deref_mut() {
                s.record(working.neighbor_indices(), selected.len(), None);
            }
            return SelectedEnsemble::uniform(selected);
        }
        let reduced = match minority {
            Some(minority) => reduce_region_bi(&working, validation, minority),
            None => reduce_region_b(&working, validation),
        };
        if let Some(s) = sink.as_deref_mut() {
            // An empty result of the same-size region is the dead-end
            // sentinel, not a removal.
            let removed = if reduced.len() + 1 == working.len() {
                working
                    .neighbor_indices()
                    .iter()
                    .find(|idx| !reduced.neighbor_indices().contains(idx))
                    .copied()
            } else {
                None
            };
            s.record(working.neighbor_indices(), 0, removed);
        }
        working = reduced;
    }
    // Region exhausted without a selection: KNORA-E on the original region.
    if let Some(s) = sink.as_deref_mut() {
        s.trace.fallback_used = true;
    }
    knora_e_among(oracle, region, candidates, sink)
}

/// KNORA-Borderline: the KNORA-E loop with the class-set-preserving
/// reduction; falls back to the full KNORA-E procedure on the original
/// region when the reduction dead-ends.
pub fn select_knora_b(
    oracle: &OracleMatrix,
    region: &RegionOfCompetence,
    validation: &Dataset,
) -> SelectedEnsemble {
    knora_borderline_among(oracle, region, validation, None, &all_indices(oracle), None)
}

/// [`select_knora_b`] with a full trace of the run.
pub fn select_knora_b_traced(
    oracle: &OracleMatrix,
    region: &RegionOfCompetence,
    validation: &Dataset,
) -> (SelectedEnsemble, SelectionTrace) {
    let mut trace = SelectionTrace::new("knora-b");
    let ensemble = knora_borderline_among(
        oracle,
        region,
        validation,
        None,
        &all_indices(oracle),
        Some(&mut TraceSink {
            trace: &mut trace,
            validation,
        }),
    );
    (ensemble, trace)
}

/// KNORA-Borderline-Imbalanced: the KNORA-B loop with the
/// minority-protecting reduction.
pub fn select_knora_bi(
    oracle: &OracleMatrix,
    region: &RegionOfCompetence,
    validation: &Dataset,
    minority: &ClassLabel,
) -> SelectedEnsemble {
    knora_borderline_among(
        oracle,
        region,
        validation,
        Some(minority),
        &all_indices(oracle),
        None,
    )
}

/// [`select_knora_bi`] with a full trace of the run.
pub fn select_knora_bi_traced(
    oracle: &OracleMatrix,
    region: &RegionOfCompetence,
    validation: &Dataset,
    minority: &ClassLabel,
) -> (SelectedEnsemble, SelectionTrace) {
    let mut trace = SelectionTrace::new("knora-bi");
    let ensemble = knora_borderline_among(
        oracle,
        region,
        validation,
        Some(minority),
        &all_indices(oracle),
        Some(&mut TraceSink {
            trace: &mut trace,
            validation,
        }),
    );
    (ensemble, trace)
}

/// Frienemy pre-selection. In an indecision region, keeps the classifiers
/// that are correct on at least one pair of region samples with different
/// labels; everywhere else (or when nothing qualifies) the whole pool
/// passes through.
///
/// This is a simplified stand-in for the full FIRE-DES framework and is
/// labelled as such in harness reports.
pub fn preselect_dfp(
    oracle: &OracleMatrix,
    region: &RegionOfCompetence,
    validation: &Dataset,
) -> Vec<usize> {
    let all = all_indices(oracle);
    if !is_indecision_region(region, validation) {
        return all;
    }
    let crosses: Vec<usize> = all
        .iter()
        .copied()
        .filter(|&i| {
            let correct_classes = region
                .neighbor_indices()
                .iter()
                .filter(|&&j| oracle.is_correct(i, j))
                .map(|&j| validation.label(j))
                .collect::<std::collections::BTreeSet<_>>();
            correct_classes.len() >= 2
        })
        .collect();
    if crosses.is_empty() {
        all
    } else {
        crosses
    }
}

/// Weighted majority vote of the selected ensemble on `query`.
///
/// Returns the winning label and the positive-class vote fraction in
/// [0, 1], used as the ranking score for AUC. Ties go to the pool's
/// positive label (the minority class under the harness convention).
pub fn combine_votes(
    ensemble: &SelectedEnsemble,
    pool: &ClassifierPool,
    query: &[f64],
) -> Result<(ClassLabel, f64)> {
    if ensemble.is_empty() {
        return Err(Error::InvalidInput(
            "cannot vote with an empty ensemble".into(),
        ));
    }
    let mut positive_votes: u64 = 0;
    let mut total: u64 = 0;
    for member in &ensemble.members {
        let weight = u64::from(member.weight);
        if pool.classifier(member.classifier).predicts_positive(query) {
            positive_votes += weight;
        }
        total += weight;
    }
    let score = positive_votes as f64 / total as f64;
    let predicted = if positive_votes * 2 >= total {
        pool.positive_label().clone()
    } else {
        pool.negative_label().clone()
    };
    Ok((predicted, score))
}

/// The built-in technique family. `dfp` wraps the selector with
/// [`preselect_dfp`] (the F-prefixed variants).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TechniqueKind {
    KnoraU,
    KnoraE,
    KnoraB,
    KnoraBi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Technique {
    pub kind: TechniqueKind,
    pub dfp: bool,
}

impl Technique {
    pub fn plain(kind: TechniqueKind) -> Self {
        Technique { kind, dfp: false }
    }

    pub fn name(&self) -> String {
        let base = match self.kind {
            TechniqueKind::KnoraU => "knora-u",
            TechniqueKind::KnoraE => "knora-e",
            TechniqueKind::KnoraB => "knora-b",
            TechniqueKind::KnoraBi => "knora-bi",
        };
        if self.dfp {
            format!("f{base}")
        } else {
            base.to_string()
        }
    }

    /// Parses names like `knora-bi` or `fknora-e` (case-insensitive).
    pub fn parse(name: &str) -> Option<Technique> {
        let lower = name.trim().to_lowercase();
        let (dfp, base) = match lower.strip_prefix("fknora") {
            Some(rest) => (true, format!("knora{rest}")),
            None => (false, lower),
        };
        let kind = match base.as_str() {
            "knora-u" => TechniqueKind::KnoraU,
            "knora-e" => TechniqueKind::KnoraE,
            "knora-b" => TechniqueKind::KnoraB,
            "knora-bi" => TechniqueKind::KnoraBi,
            _ => return None,
        };
        Some(Technique { kind, dfp })
    }
}

/// Everything a selector needs for one query: the competence matrix, the
/// query's region, the validation set behind it, and the minority class.
pub struct SelectionContext<'a> {
    pub oracle: &'a OracleMatrix,
    pub region: &'a RegionOfCompetence,
    pub validation: &'a Dataset,
    pub minority: &'a ClassLabel,
}

/// Plugin interface for dynamic selection techniques: a function from a
/// region of competence and an oracle matrix to a selected ensemble.
/// Implement this to plug additional techniques into the harness.
pub trait DesTechnique {
    fn name(&self) -> String;
    fn select(&self, ctx: &SelectionContext) -> SelectedEnsemble;
}

impl Technique {
    fn candidates(&self, ctx: &SelectionContext) -> Vec<usize> {
        if self.dfp {
            preselect_dfp(ctx.oracle, ctx.region, ctx.validation)
        } else {
            all_indices(ctx.oracle)
        }
    }

    /// Runs the technique and returns the trace alongside the ensemble.
    pub fn select_traced(&self, ctx: &SelectionContext) -> (SelectedEnsemble, SelectionTrace) {
        let candidates = self.candidates(ctx);
        let mut trace = SelectionTrace::new(&self.name());
        let mut sink = TraceSink {
            trace: &mut trace,
            validation: ctx.validation,
        };
        let ensemble = match self.kind {
            TechniqueKind::KnoraU => {
                let e = knora_u_among(ctx.oracle, ctx.region, &candidates);
                sink.record(ctx.region.neighbor_indices(), e.len(), None);
                e
            }
            TechniqueKind::KnoraE => {
                knora_e_among(ctx.oracle, ctx.region, &candidates, Some(&mut sink))
            }
            TechniqueKind::KnoraB => knora_borderline_among(
                ctx.oracle,
                ctx.region,
                ctx.validation,
                None,
                &candidates,
                Some(&mut sink),
            ),
            TechniqueKind::KnoraBi => knora_borderline_among(
                ctx.oracle,
                ctx.region,
                ctx.validation,
                Some(ctx.minority),
                &candidates,
                Some(&mut sink),
            ),
        };
        (ensemble, trace)
    }
}

impl DesTechnique for Technique {
    fn name(&self) -> String {
        Technique::name(self)
    }

    fn select(&self, ctx: &SelectionContext) -> SelectedEnsemble {
        let candidates = self.candidates(ctx);
        match self.kind {
            TechniqueKind::KnoraU => knora_u_among(ctx.oracle, ctx.region, &candidates),
            TechniqueKind::KnoraE => knora_e_among(ctx.oracle, ctx.region, &candidates, None),
            TechniqueKind::KnoraB => knora_borderline_among(
                ctx.oracle,
                ctx.region,
                ctx.validation,
                None,
                &candidates,
                None,
            ),
            TechniqueKind::KnoraBi => knora_borderline_among(
                ctx.oracle,
                ctx.region,
                ctx.validation,
                Some(ctx.minority),
                &candidates,
                None,
            ),
        }
    }
}

/// Region snapshot of the last pre-fallback iteration, with its class set
/// compared against the original. Used by property tests to check that
/// every pre-fallback KNORA-B selection happened on a class-set-preserving
/// subregion.
pub fn final_region_of(trace: &SelectionTrace) -> Option<&TraceIteration> {
    trace.iterations.iter().rev().find(|it| it.selected > 0)
}
