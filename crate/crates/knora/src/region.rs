//! Regions of competence: K nearest validation neighbors of a query and
//! the class-aware reduction procedures used by the borderline selectors.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};

/// Validation-sample indices around a query, ordered nearest first with
/// their (nondecreasing) Euclidean distances. An empty region is the
/// sentinel the reduction procedures return when no removal is legal; it
/// triggers the fallback selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionOfCompetence {
    neighbor_indices: Vec<usize>,
    distances: Vec<f64>,
}

impl RegionOfCompetence {
    pub fn new(neighbor_indices: Vec<usize>, distances: Vec<f64>) -> Result<Self> {
        if neighbor_indices.len() != distances.len() {
            return Err(Error::InvalidInput(
                "neighbor and distance lists differ in length".into(),
            ));
        }
        if distances.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput(
                "distances must be nondecreasing".into(),
            ));
        }
        if distances.iter().any(|d| d.is_nan() || *d < 0.0) {
            return Err(Error::InvalidInput("distances must be nonnegative".into()));
        }
        let mut seen = neighbor_indices.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != neighbor_indices.len() {
            return Err(Error::InvalidInput(
                "neighbor indices must be unique".into(),
            ));
        }
        Ok(RegionOfCompetence {
            neighbor_indices,
            distances,
        })
    }

    pub fn empty() -> Self {
        RegionOfCompetence {
            neighbor_indices: Vec::new(),
            distances: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.neighbor_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbor_indices.is_empty()
    }

    /// Validation indices, nearest first.
    pub fn neighbor_indices(&self) -> &[usize] {
        &self.neighbor_indices
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// Region with the neighbor at `position` removed (0 = nearest).
    pub fn without_position(&self, position: usize) -> RegionOfCompetence {
        let mut neighbor_indices = self.neighbor_indices.clone();
        let mut distances = self.distances.clone();
        neighbor_indices.remove(position);
        distances.remove(position);
        RegionOfCompetence {
            neighbor_indices,
            distances,
        }
    }

    /// Region with the furthest neighbor removed.
    pub fn without_furthest(&self) -> RegionOfCompetence {
        if self.is_empty() {
            return RegionOfCompetence::empty();
        }
        self.without_position(self.len() - 1)
    }
}

/// Distinct labels and per-class counts of a region's neighbors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionClassProfile {
    pub counts: BTreeMap<ClassLabel, usize>,
}

impl RegionClassProfile {
    pub fn of(region: &RegionOfCompetence, validation: &Dataset) -> Self {
        let mut counts = BTreeMap::new();
        for &idx in region.neighbor_indices() {
            *counts.entry(validation.label(idx).clone()).or_insert(0) += 1;
        }
        RegionClassProfile { counts }
    }

    pub fn class_set(&self) -> Vec<&ClassLabel> {
        self.counts.keys().collect()
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn size(&self) -> usize {
        self.counts.values().sum()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(PartialEq)]
struct HeapEntry {
    dist_sq: f64,
    index: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Finite distances only; ties broken by ascending validation index.
        self.dist_sq
            .partial_cmp(&other.dist_sq)
            .expect("distances are finite")
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Finds the `k` validation samples nearest to `query` under Euclidean
/// distance. Exact distance ties are broken by ascending validation index,
/// and the result is ordered nearest first.
pub fn knn_region(query: &[f64], validation: &Dataset, k: usize) -> Result<RegionOfCompetence> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if k > validation.len() {
        return Err(Error::RegionTooLarge {
            k,
            v: validation.len(),
        });
    }
    if query.len() != validation.n_features() {
        return Err(Error::DimensionMismatch {
            expected: validation.n_features(),
            got: query.len(),
        });
    }

    // Max-heap of the k best candidates; the root is the current worst.
    let mut heap = std::collections::BinaryHeap::with_capacity(k + 1);
    for (index, row) in validation.rows().enumerate() {
        let entry = HeapEntry {
            dist_sq: squared_distance(query, row),
            index,
        };
        if heap.len() < k {
            heap.push(entry);
        } else if entry < *heap.peek().expect("heap is non-empty") {
            heap.pop();
            heap.push(entry);
        }
    }

    let mut entries = heap.into_sorted_vec();
    entries.truncate(k);
    let neighbor_indices = entries.iter().map(|e| e.index).collect();
    let distances = entries.iter().map(|e| e.dist_sq.sqrt()).collect();
    RegionOfCompetence::new(neighbor_indices, distances)
}

/// True iff the region holds samples from more than one class.
pub fn is_indecision_region(region: &RegionOfCompetence, validation: &Dataset) -> bool {
    RegionClassProfile::of(region, validation).n_classes() >= 2
}

/// Class-set-preserving reduction: removes the furthest neighbor whose
/// removal keeps every class of the region represented, scanning from the
/// furthest to the nearest. Returns the empty region when no neighbor can
/// be removed (exactly one sample left per represented class), signalling
/// the caller to fall back.
pub fn reduce_region_b(region: &RegionOfCompetence, validation: &Dataset) -> RegionOfCompetence {
    let profile = RegionClassProfile::of(region, validation);
    for position in (0..region.len()).rev() {
        let label = validation.label(region.neighbor_indices()[position]);
        // Removal preserves the class set iff the class keeps a sample.
        if profile.counts[label] >= 2 {
            return region.without_position(position);
        }
    }
    RegionOfCompetence::empty()
}

/// Minority-protecting reduction: a neighbor is removable when it is not
/// from the minority class, or when its removal preserves the class set.
/// Majority samples are therefore always removable; the last minority
/// sample never is. Returns the empty region when nothing is removable.
pub fn reduce_region_bi(
    region: &RegionOfCompetence,
    validation: &Dataset,
    minority: &ClassLabel,
) -> RegionOfCompetence {
    let profile = RegionClassProfile::of(region, validation);
    for position in (0..region.len()).rev() {
        let label = validation.label(region.neighbor_indices()[position]);
        if label != minority || profile.counts[label] >= 2 {
            return region.without_position(position);
        }
    }
    RegionOfCompetence::empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn label(s: &str) -> ClassLabel {
        ClassLabel::new(s)
    }

    /// 1-D validation set whose row i has value i, labeled by `labels[i]`.
    fn line_dataset(labels: &[&str]) -> Dataset {
        let features: Vec<f64> = (0..labels.len()).map(|i| i as f64).collect();
        Dataset::from_parts(
            "line",
            features,
            1,
            labels.iter().map(|s| label(s)).collect(),
        )
        .unwrap()
    }

    /// Region over the first `labels.len()` rows of `line_dataset(labels)`,
    /// ordered nearest first as listed.
    fn region_over(labels: &[&str]) -> (RegionOfCompetence, Dataset) {
        let d = line_dataset(labels);
        let n = labels.len();
        let region =
            RegionOfCompetence::new((0..n).collect(), (0..n).map(|i| i as f64).collect()).unwrap();
        (region, d)
    }

    fn region_labels(region: &RegionOfCompetence, d: &Dataset) -> Vec<String> {
        region
            .neighbor_indices()
            .iter()
            .map(|&i| d.label(i).to_string())
            .collect()
    }

    #[test]
    fn knn_on_line() {
        let d = line_dataset(&["a", "b", "a", "b"]);
        let r = knn_region(&[0.1], &d, 2).unwrap();
        assert_eq!(r.neighbor_indices(), &[0, 1]);
        assert!((r.distances()[0] - 0.1).abs() < 1e-12);
        assert!((r.distances()[1] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn knn_tie_prefers_lower_index() {
        // Rows at -1 and +1 are equidistant from the origin.
        let d =
            Dataset::from_parts("tie", vec![1.0, -1.0], 1, vec![label("a"), label("b")]).unwrap();
        let r = knn_region(&[0.0], &d, 1).unwrap();
        assert_eq!(r.neighbor_indices(), &[0]);
    }

    #[test]
    fn knn_matches_exhaustive_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = 50;
            let f = 5;
            let features: Vec<f64> = (0..n * f).map(|_| rng.random::<f64>()).collect();
            let labels = (0..n)
                .map(|i| label(if i % 2 == 0 { "a" } else { "b" }))
                .collect();
            let d = Dataset::from_parts("rand", features, f, labels).unwrap();
            let query: Vec<f64> = (0..f).map(|_| rng.random::<f64>()).collect();

            let r = knn_region(&query, &d, 7).unwrap();

            // Oracle: sort all indices by (distance, index) and take 7.
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                squared_distance(&query, d.row(a))
                    .partial_cmp(&squared_distance(&query, d.row(b)))
                    .unwrap()
                    .then(a.cmp(&b))
            });
            assert_eq!(r.neighbor_indices(), &order[..7]);
        }
    }

    #[test]
    fn knn_rejects_k_larger_than_validation() {
        let d = line_dataset(&["a", "b"]);
        assert!(matches!(
            knn_region(&[0.0], &d, 3),
            Err(Error::RegionTooLarge { k: 3, v: 2 })
        ));
    }

    #[test]
    fn indecision_region_detection() {
        let (r, d) = region_over(&["o", "o", "o"]);
        assert!(!is_indecision_region(&r, &d));
        let (r, d) = region_over(&["o", "o", "s"]);
        assert!(is_indecision_region(&r, &d));
    }

    #[test]
    fn reduce_b_removes_furthest_removable() {
        let (r, d) = region_over(&["o", "s", "s"]);
        let reduced = reduce_region_b(&r, &d);
        assert_eq!(region_labels(&reduced, &d), vec!["o", "s"]);
    }

    #[test]
    fn reduce_b_skips_last_representative() {
        // Furthest sample is the only "o": the second furthest goes.
        let (r, d) = region_over(&["s", "s", "o"]);
        let reduced = reduce_region_b(&r, &d);
        assert_eq!(region_labels(&reduced, &d), vec!["s", "o"]);
    }

    #[test]
    fn reduce_b_returns_empty_when_stuck() {
        let (r, d) = region_over(&["o", "s"]);
        let reduced = reduce_region_b(&r, &d);
        assert!(reduced.is_empty());
    }

    #[test]
    fn reduce_bi_majority_always_removable() {
        let (r, d) = region_over(&["o", "s", "s"]);
        let reduced = reduce_region_bi(&r, &d, &label("o"));
        assert_eq!(region_labels(&reduced, &d), vec!["o", "s"]);
    }

    #[test]
    fn reduce_bi_protects_last_minority() {
        let (r, d) = region_over(&["s", "s", "o"]);
        let reduced = reduce_region_bi(&r, &d, &label("o"));
        assert_eq!(region_labels(&reduced, &d), vec!["s", "o"]);
    }

    #[test]
    fn reduce_bi_on_minority_free_region_removes_furthest() {
        let (r, d) = region_over(&["s", "s", "s"]);
        let reduced = reduce_region_bi(&r, &d, &label("o"));
        assert_eq!(reduced.neighbor_indices(), &[0, 1]);
    }

    /// Exhaustive label patterns up to size 6: reduction invariants.
    #[test]
    fn exhaustive_reduction_invariants() {
        for size in 1..=6usize {
            for pattern in 0u32..(1 << size) {
                let names: Vec<&str> = (0..size)
                    .map(|i| if pattern >> i & 1 == 1 { "min" } else { "maj" })
                    .collect();
                let (region, d) = region_over(&names);
                let before = RegionClassProfile::of(&region, &d);

                let reduced = reduce_region_b(&region, &d);
                assert!(reduced.len() == size - 1 || reduced.is_empty());
                if !reduced.is_empty() {
                    let after = RegionClassProfile::of(&reduced, &d);
                    assert_eq!(after.class_set(), before.class_set());
                }

                let minority = label("min");
                let reduced = reduce_region_bi(&region, &d, &minority);
                assert!(reduced.len() == size - 1 || reduced.is_empty());
                let had_minority = names.contains(&"min");
                let had_majority = names.contains(&"maj");
                if !reduced.is_empty() && had_minority {
                    let after = RegionClassProfile::of(&reduced, &d);
                    assert!(
                        after.counts.contains_key(&minority),
                        "minority stranded for pattern {names:?}"
                    );
                }
                // A majority sample is always removable, so with one the
                // reduction only empties the region by removing the last
                // sample of a size-1 region.
                if had_majority && size >= 2 {
                    assert!(!reduced.is_empty());
                }
                // No minority present: must equal plain furthest-removal.
                if !had_minority {
                    assert_eq!(reduced, region.without_furthest());
                }
            }
        }
    }
}
