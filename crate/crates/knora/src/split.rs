//! Nested stratified cross-validation.
//!
//! An outer stratified k-fold assigns each fold once as the test set; the
//! remaining samples are re-partitioned by an inner stratified k-fold, each
//! inner fold serving once as the validation set and the rest as training.
//! The default 5 x 4 layout yields 20 replications per dataset with a
//! 60/20/20 train/validation/test usage.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// One train/validation/test partition of the row indices of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replication {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// The full set of replications produced by the nested split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub outer_k: usize,
    pub inner_k: usize,
    pub seed: u64,
    pub replications: Vec<Replication>,
}

/// Deterministically mixes a stream id into a master seed (splitmix64
/// finalizer). Used to derive independent RNG streams.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splits `n` items into `k` chunks as evenly as possible, remainder going
/// to the earliest chunks.
fn chunk_sizes(n: usize, k: usize) -> Vec<usize> {
    let base = n / k;
    let rem = n % k;
    (0..k).map(|i| base + usize::from(i < rem)).collect()
}

fn partition<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let sizes = chunk_sizes(items.len(), k);
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for size in sizes {
        out.push(items[start..start + size].to_vec());
        start += size;
    }
    out
}

/// Builds the nested stratified fold plan for `dataset`.
///
/// Within every class the rows are shuffled once per level with RNG streams
/// derived from `seed`, then dealt into folds whose per-class sizes differ
/// by at most one. The result is fully determined by
/// `(dataset labels, outer_k, inner_k, seed)`; index lists are sorted
/// ascending.
pub fn stratified_nested_split(
    dataset: &Dataset,
    outer_k: usize,
    inner_k: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if outer_k < 2 || inner_k < 2 {
        return Err(Error::InvalidInput(
            "outer_k and inner_k must both be at least 2".into(),
        ));
    }

    // Group row indices per class, classes in label order for determinism.
    let classes = dataset.classes();
    let mut by_class: Vec<Vec<usize>> = classes
        .iter()
        .map(|c| {
            (0..dataset.len())
                .filter(|&i| dataset.label(i) == c)
                .collect::<Vec<usize>>()
        })
        .collect();

    for (class, rows) in classes.iter().zip(&by_class) {
        if rows.len() < outer_k {
            return Err(Error::InsufficientClassSamples {
                label: class.to_string(),
                count: rows.len(),
                required: outer_k,
            });
        }
    }

    let mut outer_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    for rows in &mut by_class {
        rows.shuffle(&mut outer_rng);
    }

    // outer_folds[i][c] = rows of class c in outer fold i.
    let mut outer_folds: Vec<Vec<Vec<usize>>> = vec![Vec::new(); outer_k];
    for rows in &by_class {
        for (fold, chunk) in partition(rows, outer_k).into_iter().enumerate() {
            outer_folds[fold].push(chunk);
        }
    }

    let mut replications = Vec::with_capacity(outer_k * inner_k);
    for test_fold in 0..outer_k {
        // Pool the remaining folds per class and re-shuffle before the
        // inner split.
        let mut rest_by_class: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
        for (fold_idx, fold) in outer_folds.iter().enumerate() {
            if fold_idx == test_fold {
                continue;
            }
            for (c, chunk) in fold.iter().enumerate() {
                rest_by_class[c].extend_from_slice(chunk);
            }
        }
        let mut inner_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1 + test_fold as u64));
        for rows in &mut rest_by_class {
            rows.sort_unstable(); // canonical base order before the seeded shuffle
            rows.shuffle(&mut inner_rng);
        }

        let inner_chunks: Vec<Vec<Vec<usize>>> = rest_by_class
            .iter()
            .map(|rows| partition(rows, inner_k))
            .collect();

        let mut test: Vec<usize> = outer_folds[test_fold].iter().flatten().copied().collect();
        test.sort_unstable();

        for val_fold in 0..inner_k {
            let mut validation = Vec::new();
            let mut train = Vec::new();
            for class_chunks in &inner_chunks {
                for (chunk_idx, chunk) in class_chunks.iter().enumerate() {
                    if chunk_idx == val_fold {
                        validation.extend_from_slice(chunk);
                    } else {
                        train.extend_from_slice(chunk);
                    }
                }
            }
            validation.sort_unstable();
            train.sort_unstable();
            replications.push(Replication {
                train,
                validation,
                test: test.clone(),
            });
        }
    }

    Ok(FoldPlan {
        outer_k,
        inner_k,
        seed,
        replications,
    })
}
