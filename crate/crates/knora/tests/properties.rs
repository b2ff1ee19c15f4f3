//! Property tests for the library-wide invariants.

use proptest::prelude::*;

use knora::dataset::{ClassLabel, Dataset};
use knora::normalize::minmax_normalize;
use knora::pool::OracleMatrix;
use knora::region::{reduce_region_bi, RegionClassProfile, RegionOfCompetence};
use knora::selection::{
    final_region_of, select_knora_b_traced, select_knora_bi, select_knora_e, select_knora_u,
    SelectionContext, Technique, TechniqueKind,
};
use knora::split::stratified_nested_split;
use knora::stats::{auc, average_ranks, wilcoxon_signed_rank, ScoredPredictions, Verdict};
use knora::DesTechnique;

fn dataset_from(features: Vec<f64>, n_features: usize, labels: Vec<u8>) -> Dataset {
    let labels = labels
        .into_iter()
        .map(|b| ClassLabel::new(if b == 0 { "maj" } else { "min" }))
        .collect();
    Dataset::from_parts("prop", features, n_features, labels).unwrap()
}

/// Random binary label vector with at least `per_class` samples per class.
fn labels_strategy(max_len: usize, per_class: usize) -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0u8..2, (2 * per_class)..max_len).prop_map(move |mut v| {
        // Force both classes to reach the quota deterministically.
        for i in 0..per_class {
            v[2 * i] = 0;
            v[2 * i + 1] = 1;
        }
        v
    })
}

proptest! {
    #[test]
    fn fold_plan_partitions_and_stratifies(labels in labels_strategy(120, 5), seed in 0u64..500) {
        let n = labels.len();
        let features: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let d = dataset_from(features, 1, labels);
        let plan = stratified_nested_split(&d, 5, 4, seed).unwrap();
        prop_assert_eq!(plan.replications.len(), 20);

        let counts = d.class_counts();
        for rep in &plan.replications {
            // Complete disjoint partition of all row indices.
            let mut all: Vec<usize> = rep.train.iter()
                .chain(&rep.validation)
                .chain(&rep.test)
                .copied()
                .collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());

            // Roughly 60/20/20 overall.
            prop_assert!((rep.test.len() as f64 - 0.2 * n as f64).abs() <= 2.0);
            prop_assert!((rep.validation.len() as f64 - 0.2 * n as f64).abs() <= 2.0);
            prop_assert!((rep.train.len() as f64 - 0.6 * n as f64).abs() <= 3.0);

            // Per-class stratification at each fold level: test within one
            // sample of n_c/5, validation within one of rest_c/4, train the
            // complement.
            for (class, &n_c) in &counts {
                let in_part = |part: &[usize]| part.iter().filter(|&&i| d.label(i) == class).count() as f64;
                let test_c = in_part(&rep.test);
                let val_c = in_part(&rep.validation);
                let train_c = in_part(&rep.train);
                let rest_c = n_c as f64 - test_c;
                prop_assert!((test_c - n_c as f64 / 5.0).abs() < 1.0);
                prop_assert!((val_c - rest_c / 4.0).abs() < 1.0);
                prop_assert!((train_c - 3.0 * rest_c / 4.0).abs() < 1.0);

                // Global proportion check. Test and validation folds stay
                // within 1/|part| of the dataset proportion; the train part
                // compounds the two rounding levels and is bounded by
                // 1.5/|part|.
                let p = n_c as f64 / n as f64;
                prop_assert!((test_c / rep.test.len() as f64 - p).abs() <= 1.0 / rep.test.len() as f64 + 1e-12);
                prop_assert!((val_c / rep.validation.len() as f64 - p).abs() <= 1.0 / rep.validation.len() as f64 + 1e-12);
                prop_assert!((train_c / rep.train.len() as f64 - p).abs() <= 1.5 / rep.train.len() as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn normalize_is_idempotent_and_order_preserving(
        rows in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 3), 2..12)
    ) {
        let n = rows.len();
        let features: Vec<f64> = rows.iter().flatten().copied().collect();
        let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        let d = dataset_from(features, 3, labels);

        let (once, _) = minmax_normalize(&d);
        for row in once.rows() {
            for &v in row {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        let (twice, _) = minmax_normalize(&once);
        prop_assert_eq!(&once, &twice);

        // Order statistics are preserved per column.
        for col in 0..3 {
            let original: Vec<f64> = d.rows().map(|r| r[col]).collect();
            let scaled: Vec<f64> = once.rows().map(|r| r[col]).collect();
            for i in 0..n {
                for j in 0..n {
                    if original[i] < original[j] {
                        prop_assert!(scaled[i] <= scaled[j]);
                    }
                }
            }
        }
    }
}

/// Random selection instance: oracle matrix, region ordered 0..s, labels.
fn instance_strategy() -> impl Strategy<Value = (Vec<Vec<bool>>, Vec<u8>)> {
    (1usize..6, 1usize..8).prop_flat_map(|(m, s)| {
        (
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), s), m),
            proptest::collection::vec(0u8..2, s),
        )
    })
}

fn region_of(s: usize) -> RegionOfCompetence {
    RegionOfCompetence::new((0..s).collect(), (0..s).map(|i| i as f64).collect()).unwrap()
}

proptest! {
    #[test]
    fn selectors_always_return_nonempty((rows, labels) in instance_strategy()) {
        let s = labels.len();
        let features: Vec<f64> = (0..s).map(|i| i as f64).collect();
        let validation = dataset_from(features, 1, labels);
        let oracle = OracleMatrix::from_rows(rows).unwrap();
        let region = region_of(s);
        let minority = ClassLabel::new("min");
        let ctx = SelectionContext {
            oracle: &oracle,
            region: &region,
            validation: &validation,
            minority: &minority,
        };
        for kind in [TechniqueKind::KnoraU, TechniqueKind::KnoraE, TechniqueKind::KnoraB, TechniqueKind::KnoraBi] {
            for dfp in [false, true] {
                let t = Technique { kind, dfp };
                prop_assert!(!t.select(&ctx).is_empty(), "{} returned empty", t.name());
            }
        }
    }

    #[test]
    fn knora_bi_equals_knora_e_without_minority((rows, _) in instance_strategy()) {
        let s = rows[0].len();
        // All-majority region.
        let validation = dataset_from((0..s).map(|i| i as f64).collect(), 1, vec![0; s]);
        let oracle = OracleMatrix::from_rows(rows).unwrap();
        let region = region_of(s);
        let minority = ClassLabel::new("min");
        let bi = select_knora_bi(&oracle, &region, &validation, &minority);
        let e = select_knora_e(&oracle, &region);
        prop_assert_eq!(bi, e);
        // And the reduction itself equals plain furthest-removal.
        prop_assert_eq!(
            reduce_region_bi(&region, &validation, &minority),
            region.without_furthest()
        );
    }

    #[test]
    fn knora_u_weight_is_monotone((rows, labels) in instance_strategy(), flip_i in 0usize..6, flip_j in 0usize..8) {
        let s = labels.len();
        let m = rows.len();
        let (flip_i, flip_j) = (flip_i % m, flip_j % s);
        prop_assume!(!rows[flip_i][flip_j]);
        let _ = labels;

        let region = region_of(s);
        let oracle = OracleMatrix::from_rows(rows.clone()).unwrap();
        let before = select_knora_u(&oracle, &region);

        let mut improved = rows;
        improved[flip_i][flip_j] = true;
        let oracle = OracleMatrix::from_rows(improved).unwrap();
        let after = select_knora_u(&oracle, &region);

        let weight_of = |e: &knora::SelectedEnsemble, c: usize| {
            e.members.iter().find(|mb| mb.classifier == c).map_or(0, |mb| mb.weight)
        };
        // The flipped classifier's weight never decreases. (It can only
        // appear or grow; the all-wrong fallback gives weight 1 <= count.)
        let b = weight_of(&before, flip_i);
        let a = weight_of(&after, flip_i);
        prop_assert!(a >= b.max(1), "weight went from {b} to {a}");
    }

    #[test]
    fn knora_b_prefallback_selection_is_on_class_preserving_subregion((rows, labels) in instance_strategy()) {
        let s = labels.len();
        let validation = dataset_from((0..s).map(|i| i as f64).collect(), 1, labels);
        let oracle = OracleMatrix::from_rows(rows).unwrap();
        let region = region_of(s);
        let (ensemble, trace) = select_knora_b_traced(&oracle, &region, &validation);
        if !trace.fallback_used {
            let last = final_region_of(&trace).expect("a selecting iteration exists");
            // Every selected classifier is correct on the whole final
            // subregion, and that subregion kept the original class set.
            for member in &ensemble.members {
                prop_assert!(oracle.correct_on_all(member.classifier, &last.region));
            }
            let sub = RegionOfCompetence::new(
                last.region.clone(),
                last.region.iter().map(|&i| i as f64).collect(),
            ).unwrap();
            let original = RegionClassProfile::of(&region, &validation);
            let final_profile = RegionClassProfile::of(&sub, &validation);
            prop_assert_eq!(original.class_set(), final_profile.class_set());
        }
    }
}

proptest! {
    #[test]
    fn auc_invariant_under_increasing_transform(
        scores in proptest::collection::vec(0.0f64..1.0, 4..40),
        labels in proptest::collection::vec(0u8..2, 4..40)
    ) {
        let n = scores.len().min(labels.len());
        let mut labels = labels[..n].to_vec();
        labels[0] = 0;
        labels[1] = 1;
        let truth: Vec<ClassLabel> = labels
            .iter()
            .map(|&b| ClassLabel::new(if b == 0 { "neg" } else { "pos" }))
            .collect();
        let scores = scores[..n].to_vec();
        let positive = ClassLabel::new("pos");

        let p = ScoredPredictions::new(scores.clone(), truth.clone(), positive.clone()).unwrap();
        let base = auc(&p).unwrap();

        // Strictly increasing transform: x -> exp(3x) + x.
        let transformed: Vec<f64> = scores.iter().map(|&x| (3.0 * x).exp() + x).collect();
        let p2 = ScoredPredictions::new(transformed, truth.clone(), positive.clone()).unwrap();
        prop_assert!((auc(&p2).unwrap() - base).abs() < 1e-12);

        // Swapping the positive class complements the AUC.
        let flipped = ScoredPredictions::new(scores, truth, ClassLabel::new("neg")).unwrap();
        prop_assert!((base + auc(&flipped).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wilcoxon_direction_antisymmetry(
        diffs in proptest::collection::vec(-1.0f64..1.0, 6..25)
    ) {
        prop_assume!(diffs.iter().all(|d| d.abs() > 1e-9));
        let b: Vec<f64> = (0..diffs.len()).map(|i| i as f64 * 0.01).collect();
        let a: Vec<f64> = b.iter().zip(&diffs).map(|(x, d)| x + d).collect();
        let alpha = 0.05;
        let forward = wilcoxon_signed_rank(&a, &b, alpha).unwrap();
        let backward = wilcoxon_signed_rank(&b, &a, alpha).unwrap();

        // Skip boundary-straddling p-values: the discrete tie mass there
        // legitimately maps Better to Equal rather than Worse.
        let near = |p: f64, t: f64| (p - t).abs() < 0.02;
        prop_assume!(!near(forward.p_value, alpha) && !near(forward.p_value, 1.0 - alpha));
        prop_assume!(!near(backward.p_value, alpha) && !near(backward.p_value, 1.0 - alpha));

        match forward.sign {
            Verdict::Better => prop_assert_eq!(backward.sign, Verdict::Worse),
            Verdict::Worse => prop_assert_eq!(backward.sign, Verdict::Better),
            Verdict::Equal => prop_assert_eq!(backward.sign, Verdict::Equal),
        }
    }

    #[test]
    fn combine_votes_score_equals_independent_recount(
        weights in proptest::collection::vec(1u32..8, 1..100),
        biases in proptest::collection::vec(proptest::bool::ANY, 1..100),
        x in -2.0f64..2.0
    ) {
        use knora::perceptron::LinearClassifier;
        use knora::pool::ClassifierPool;
        use knora::selection::{combine_votes, EnsembleMember, SelectedEnsemble};

        let n = weights.len().min(biases.len());
        let pos = ClassLabel::new("pos");
        let neg = ClassLabel::new("neg");
        // Constant classifiers: member i always votes for its bias sign.
        let classifiers: Vec<LinearClassifier> = biases[..n]
            .iter()
            .map(|&b| {
                LinearClassifier::new(vec![0.0], if b { 1.0 } else { -1.0 }, pos.clone(), neg.clone())
            })
            .collect();
        let pool = ClassifierPool::from_classifiers(
            classifiers,
            (0..n as u64).collect(),
            pos.clone(),
            neg.clone(),
        )
        .unwrap();
        let ensemble = SelectedEnsemble {
            members: weights[..n]
                .iter()
                .enumerate()
                .map(|(classifier, &weight)| EnsembleMember { classifier, weight })
                .collect(),
        };
        let (predicted, score) = combine_votes(&ensemble, &pool, &[x]).unwrap();

        let total: u64 = weights[..n].iter().map(|&w| u64::from(w)).sum();
        let pos_votes: u64 = weights[..n]
            .iter()
            .zip(&biases[..n])
            .filter(|(_, &b)| b)
            .map(|(&w, _)| u64::from(w))
            .sum();
        prop_assert!((score - pos_votes as f64 / total as f64).abs() < 1e-12);
        let expected = if 2 * pos_votes >= total { &pos } else { &neg };
        prop_assert_eq!(&predicted, expected);
    }

    #[test]
    fn ranks_sum_to_triangular_number_per_dataset(
        row in proptest::collection::vec(0.0f64..1.0, 2..8)
    ) {
        let t = row.len();
        let ranks = average_ranks(&[row]).unwrap();
        let sum: f64 = ranks.iter().sum();
        prop_assert!((sum - (t * (t + 1)) as f64 / 2.0).abs() < 1e-9);
    }
}
