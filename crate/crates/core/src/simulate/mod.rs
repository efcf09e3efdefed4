//! Simulated experiments: label oracles (clean and noisy), biased initial
//! pools, synthetic datasets, the multi-round active-learning loop, and
//! the measurements taken along the way.

mod runner;
mod synthetic;

pub use runner::{
    run_active_learning, run_active_learning_jobs, DatasetSource, ExperimentPlan, PlanOutputs,
    RunArtifacts, RunOutcome,
};
pub use synthetic::{generate_synthetic_dataset, stratified_split, SplitIndices};

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{ClassLabel, Dataset, ImageSet, SampleId};
use crate::error::{PalError, Result};
use crate::nn::TaskNetwork;
use crate::pool::{
    init_pools, initial_label_count, sample_initial_ids, LabelOracle, PoolState,
};
use crate::record::RunLog;

/// A labeler whose answers may be deliberately wrong for a fixed subset of
/// samples. Corruption is decided once up front, so asking about the same
/// sample twice always returns the same (possibly wrong) label.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    returned: Vec<ClassLabel>,
    true_labels: Vec<ClassLabel>,
    corrupted: BTreeSet<SampleId>,
    noise_rate: f64,
    seed: u64,
}

impl LabelOracle for Oracle {
    fn label(&self, id: SampleId) -> ClassLabel {
        self.returned[id.index()]
    }
}

impl Oracle {
    /// Noise-free oracle.
    pub fn clean(dataset: &Dataset) -> Self {
        Self {
            returned: dataset.true_labels.clone(),
            true_labels: dataset.true_labels.clone(),
            corrupted: BTreeSet::new(),
            noise_rate: 0.0,
            seed: 0,
        }
    }

    pub fn corrupted_ids(&self) -> &BTreeSet<SampleId> {
        &self.corrupted
    }

    pub fn noise_rate(&self) -> f64 {
        self.noise_rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The uncorrupted label; for evaluation and measurement only, never
    /// exposed to strategies.
    pub fn true_label(&self, id: SampleId) -> ClassLabel {
        self.true_labels[id.index()]
    }
}

/// Build an oracle that returns wrong labels for exactly
/// `round(noise_rate * n)` samples, chosen uniformly per seed. Replacement
/// labels are uniform over the other classes, so a corrupted answer never
/// equals the true label.
pub fn make_oracle(dataset: &Dataset, noise_rate: f64, seed: u64) -> Result<Oracle> {
    if !(0.0..1.0).contains(&noise_rate) {
        return Err(PalError::InvalidConfig(format!(
            "noise_rate must be in [0, 1), got {noise_rate}"
        )));
    }
    let n = dataset.len();
    let class_count = dataset.class_count;
    if noise_rate > 0.0 && class_count < 2 {
        return Err(PalError::InvalidConfig(
            "label noise needs at least 2 classes".into(),
        ));
    }
    let count = (noise_rate * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // The corruption draw must be independent of every other draw made
    // under the same run seed — in particular the initial-pool draw, which
    // samples the same index range with the same algorithm and would
    // otherwise share its prefix, silently nesting the starting pool
    // inside the corrupted set. A separate ChaCha stream keeps the seed
    // user-visible while decorrelating the sequences.
    rng.set_stream(1);
    let mut corrupted: Vec<SampleId> = rand::seq::index::sample(&mut rng, n, count)
        .into_iter()
        .map(|i| SampleId(i as u32))
        .collect();
    corrupted.sort_unstable();

    let mut returned = dataset.true_labels.clone();
    for &id in &corrupted {
        let truth = returned[id.index()];
        let offset = rng.gen_range(1..class_count);
        returned[id.index()] = (truth + offset) % class_count;
    }
    Ok(Oracle {
        returned,
        true_labels: dataset.true_labels.clone(),
        corrupted: corrupted.into_iter().collect(),
        noise_rate,
        seed,
    })
}

/// Initial pools whose labeled part is drawn only from classes outside
/// `excluded` (by true class). Excluded-class samples all start unlabeled
/// and are queryable from the first round. With an empty exclusion set
/// this matches [`init_pools`] exactly under the same seed.
pub fn make_biased_pool(
    dataset: &Dataset,
    initial_fraction: f64,
    excluded: &BTreeSet<ClassLabel>,
    seed: u64,
    oracle: &dyn LabelOracle,
) -> Result<PoolState> {
    if excluded.is_empty() {
        return init_pools(dataset.len(), initial_fraction, seed, oracle);
    }
    if let Some(&c) = excluded.iter().find(|&&c| c >= dataset.class_count) {
        return Err(PalError::InvalidConfig(format!(
            "excluded class {c} out of range for {} classes",
            dataset.class_count
        )));
    }
    if excluded.len() >= dataset.class_count as usize {
        return Err(PalError::InvalidConfig(
            "cannot exclude every class from the initial pool".into(),
        ));
    }
    if !(initial_fraction > 0.0 && initial_fraction <= 1.0) {
        return Err(PalError::InvalidConfig(format!(
            "initial_fraction must be in (0, 1], got {initial_fraction}"
        )));
    }
    // the fraction is of the whole dataset, even though eligibility is not
    let count = initial_label_count(dataset.len(), initial_fraction);
    if count == 0 {
        return Err(PalError::InvalidConfig(
            "initial_fraction rounds to an empty labeled pool".into(),
        ));
    }
    let eligible: Vec<SampleId> = dataset
        .ids()
        .filter(|&id| !excluded.contains(&dataset.true_label(id)))
        .collect();
    if eligible.len() < count {
        return Err(PalError::InvalidConfig(format!(
            "initial pool needs {count} samples but only {} are outside the excluded classes",
            eligible.len()
        )));
    }
    let chosen = sample_initial_ids(&eligible, count, seed);
    crate::pool::init_pools_with_ids(dataset.len(), &chosen, oracle)
}

/// Accuracy of the task network on the given samples against clean true
/// labels; the arg-max breaks ties toward the lowest class index.
pub fn evaluate_accuracy(
    net: &TaskNetwork,
    images: &ImageSet,
    ids: &[SampleId],
    true_labels: &[ClassLabel],
) -> Result<f64> {
    if ids.is_empty() {
        return Err(PalError::InvalidConfig(
            "accuracy needs a non-empty evaluation set".into(),
        ));
    }
    let pmfs = net.predict_class_probs_batch(images, ids)?;
    let mut correct = 0usize;
    for (pmf, &id) in pmfs.iter().zip(ids) {
        if pmf.argmax() == true_labels[id.index()] as usize {
            correct += 1;
        }
    }
    Ok(correct as f64 / ids.len() as f64)
}

/// Per round, the fraction of the query whose true class is in `excluded`.
/// Uses the true-class counts recorded at query time; a measurement about
/// the run, not information available to strategies.
pub fn missing_class_sampling_rate(log: &RunLog, excluded: &BTreeSet<ClassLabel>) -> Vec<f64> {
    log.rounds
        .iter()
        .map(|round| {
            let total: u64 = round.query_class_counts.iter().map(|&c| c as u64).sum();
            if total == 0 {
                return 0.0;
            }
            let hit: u64 = round
                .query_class_counts
                .iter()
                .enumerate()
                .filter(|(class, _)| excluded.contains(&(*class as ClassLabel)))
                .map(|(_, &c)| c as u64)
                .sum();
            hit as f64 / total as f64
        })
        .collect()
}

/// Fraction of currently labeled samples whose oracle label disagrees with
/// the truth — the realized noise level inside the labeled pool.
pub fn labeled_noise_fraction(pool: &PoolState, oracle: &Oracle) -> f64 {
    let pairs = pool.labeled_pairs();
    if pairs.is_empty() {
        return 0.0;
    }
    let wrong = pairs
        .iter()
        .filter(|&&(id, label)| label != oracle.true_label(id))
        .count();
    wrong as f64 / pairs.len() as f64
}
