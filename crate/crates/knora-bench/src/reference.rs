//! Deliberately naive reference selectors for differential testing.
//!
//! These re-derive every quantity from scratch each iteration - explicit
//! class-set reconstruction, no counting shortcuts, no early exits - so
//! they share as little code as possible with the production selectors in
//! `knora::selection`. They exist only as test oracles; the harness never
//! uses them for real work.

use std::collections::BTreeSet;

use knora::dataset::{ClassLabel, Dataset};
use knora::pool::OracleMatrix;
use knora::region::RegionOfCompetence;
use knora::selection::{EnsembleMember, SelectedEnsemble, TechniqueKind};

#[derive(Debug, Clone, PartialEq)]
struct Neighbor {
    validation_index: usize,
    label: ClassLabel,
}

fn neighbors_of(region: &RegionOfCompetence, validation: &Dataset) -> Vec<Neighbor> {
    region
        .neighbor_indices()
        .iter()
        .map(|&i| Neighbor {
            validation_index: i,
            label: validation.label(i).clone(),
        })
        .collect()
}

fn classes_of(psi: &[Neighbor]) -> BTreeSet<ClassLabel> {
    psi.iter().map(|n| n.label.clone()).collect()
}

fn correctly_classifies_all(oracle: &OracleMatrix, classifier: usize, psi: &[Neighbor]) -> bool {
    for neighbor in psi {
        if !oracle.is_correct(classifier, neighbor.validation_index) {
            return false;
        }
    }
    true
}

/// Reduced region of competence of the borderline selector: remove the
/// b-th nearest sample, from the furthest to the nearest, the first time
/// the removal leaves the class set unchanged; empty the region when no b
/// works.
fn reduced_region_b(psi: Vec<Neighbor>) -> Vec<Neighbor> {
    let mut psi = psi;
    let s = psi.len();
    let mut b = s;
    while psi.len() == s && b > 0 {
        let mut without = psi.clone();
        without.remove(b - 1);
        if classes_of(&without) == classes_of(&psi) {
            psi = without;
        } else {
            b -= 1;
        }
    }
    if psi.len() == s {
        psi.clear();
    }
    psi
}

/// Imbalanced variant: the b-th nearest sample is also removable whenever
/// it is not from the minority class.
fn reduced_region_bi(psi: Vec<Neighbor>, minority: &ClassLabel) -> Vec<Neighbor> {
    let mut psi = psi;
    let s = psi.len();
    let mut b = s;
    while psi.len() == s && b > 0 {
        let mut without = psi.clone();
        without.remove(b - 1);
        if &psi[b - 1].label != minority || classes_of(&without) == classes_of(&psi) {
            psi = without;
        } else {
            b -= 1;
        }
    }
    if psi.len() == s {
        psi.clear();
    }
    psi
}

fn best_accuracy_set(
    oracle: &OracleMatrix,
    psi_original: &[Neighbor],
    candidates: &[usize],
) -> Vec<usize> {
    let accuracy = |classifier: usize| {
        psi_original
            .iter()
            .filter(|n| oracle.is_correct(classifier, n.validation_index))
            .count()
    };
    let mut best = 0;
    for &c in candidates {
        if accuracy(c) > best {
            best = accuracy(c);
        }
    }
    candidates
        .iter()
        .copied()
        .filter(|&c| accuracy(c) == best)
        .collect()
}

fn knora_e(oracle: &OracleMatrix, psi_original: &[Neighbor], candidates: &[usize]) -> Vec<usize> {
    let mut psi = psi_original.to_vec();
    while !psi.is_empty() {
        let mut selected = Vec::new();
        for &c in candidates {
            if correctly_classifies_all(oracle, c, &psi) {
                selected.push(c);
            }
        }
        if !selected.is_empty() {
            return selected;
        }
        // Remove the sample that is the furthest from the query.
        psi.pop();
    }
    best_accuracy_set(oracle, psi_original, candidates)
}

fn knora_borderline(
    oracle: &OracleMatrix,
    psi_original: &[Neighbor],
    minority: Option<&ClassLabel>,
    candidates: &[usize],
) -> Vec<usize> {
    let mut eoc: Vec<usize> = Vec::new();
    let mut psi = psi_original.to_vec();
    while eoc.is_empty() && !psi.is_empty() {
        for &c in candidates {
            if correctly_classifies_all(oracle, c, &psi) {
                eoc.push(c);
            }
        }
        if eoc.is_empty() {
            psi = match minority {
                Some(minority) => reduced_region_bi(psi, minority),
                None => reduced_region_b(psi),
            };
        }
    }
    if eoc.is_empty() {
        eoc = knora_e(oracle, psi_original, candidates);
    }
    eoc
}

fn knora_u(oracle: &OracleMatrix, psi: &[Neighbor], candidates: &[usize]) -> Vec<EnsembleMember> {
    let mut members = Vec::new();
    for &c in candidates {
        let mut votes = 0u32;
        for neighbor in psi {
            if oracle.is_correct(c, neighbor.validation_index) {
                votes += 1;
            }
        }
        if votes > 0 {
            members.push(EnsembleMember {
                classifier: c,
                weight: votes,
            });
        }
    }
    if members.is_empty() {
        members = candidates
            .iter()
            .map(|&c| EnsembleMember {
                classifier: c,
                weight: 1,
            })
            .collect();
    }
    members
}

/// Frienemy pre-selection by explicit pair scanning.
pub fn reference_preselect(
    oracle: &OracleMatrix,
    region: &RegionOfCompetence,
    validation: &Dataset,
) -> Vec<usize> {
    let psi = neighbors_of(region, validation);
    let all: Vec<usize> = (0..oracle.n_classifiers()).collect();
    if classes_of(&psi).len() < 2 {
        return all;
    }
    let mut selected = Vec::new();
    for &c in &all {
        let mut crosses = false;
        for a in &psi {
            for b in &psi {
                if a.label != b.label
                    && oracle.is_correct(c, a.validation_index)
                    && oracle.is_correct(c, b.validation_index)
                {
                    crosses = true;
                }
            }
        }
        if crosses {
            selected.push(c);
        }
    }
    if selected.is_empty() {
        all
    } else {
        selected
    }
}

/// Naive transcription of the four selectors, optionally wrapped with the
/// frienemy pre-selection. Returns the same ensemble shape as the
/// production path.
pub fn reference_select(
    kind: TechniqueKind,
    dfp: bool,
    oracle: &OracleMatrix,
    region: &RegionOfCompetence,
    validation: &Dataset,
    minority: &ClassLabel,
) -> SelectedEnsemble {
    let candidates = if dfp {
        reference_preselect(oracle, region, validation)
    } else {
        (0..oracle.n_classifiers()).collect()
    };
    let psi = neighbors_of(region, validation);
    match kind {
        TechniqueKind::KnoraU => SelectedEnsemble {
            members: knora_u(oracle, &psi, &candidates),
        },
        TechniqueKind::KnoraE => SelectedEnsemble::uniform(knora_e(oracle, &psi, &candidates)),
        TechniqueKind::KnoraB => {
            SelectedEnsemble::uniform(knora_borderline(oracle, &psi, None, &candidates))
        }
        TechniqueKind::KnoraBi => {
            SelectedEnsemble::uniform(knora_borderline(oracle, &psi, Some(minority), &candidates))
        }
    }
}
