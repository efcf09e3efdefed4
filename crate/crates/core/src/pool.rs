//! Labeled/unlabeled pool bookkeeping and shared run hyperparameters.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, SampleId};
use crate::error::{PalError, Result};

/// Source of class labels for queried samples.
///
/// Implementations may return noisy labels; the pool records whatever the
/// oracle says, never ground truth directly.
pub trait LabelOracle {
    fn label(&self, id: SampleId) -> ClassLabel;
}

/// Disjoint labeled and unlabeled pools over one dataset.
///
/// The labeled side stores oracle-provided labels only. Deterministic
/// iteration order (sorted by id) is part of the contract: every consumer
/// that iterates a pool sees the same order on every run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    labeled: BTreeMap<SampleId, ClassLabel>,
    unlabeled: BTreeSet<SampleId>,
}

impl PoolState {
    pub fn labeled_len(&self) -> usize {
        self.labeled.len()
    }

    pub fn unlabeled_len(&self) -> usize {
        self.unlabeled.len()
    }

    pub fn total_len(&self) -> usize {
        self.labeled.len() + self.unlabeled.len()
    }

    /// Fraction of the full pool that is labeled.
    pub fn labeled_fraction(&self) -> f64 {
        self.labeled.len() as f64 / self.total_len() as f64
    }

    /// Labeled ids in ascending order.
    pub fn labeled_ids(&self) -> Vec<SampleId> {
        self.labeled.keys().copied().collect()
    }

    /// Unlabeled ids in ascending order.
    pub fn unlabeled_ids(&self) -> Vec<SampleId> {
        self.unlabeled.iter().copied().collect()
    }

    /// (id, oracle label) pairs in ascending id order.
    pub fn labeled_pairs(&self) -> Vec<(SampleId, ClassLabel)> {
        self.labeled.iter().map(|(&id, &l)| (id, l)).collect()
    }

    pub fn is_unlabeled(&self, id: SampleId) -> bool {
        self.unlabeled.contains(&id)
    }

    pub fn oracle_label(&self, id: SampleId) -> Option<ClassLabel> {
        self.labeled.get(&id).copied()
    }
}

/// Number of samples labeled initially for `n` pool samples at `fraction`,
/// using round-half-up so logs are comparable across implementations.
pub fn initial_label_count(n: usize, fraction: f64) -> usize {
    (fraction * n as f64).round() as usize
}

/// Draw `count` ids uniformly without replacement from `eligible`,
/// deterministically per seed. Shared by the plain and biased pool builders
/// so that an empty class exclusion reproduces the unbiased draw exactly.
pub(crate) fn sample_initial_ids(eligible: &[SampleId], count: usize, seed: u64) -> Vec<SampleId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, eligible.len(), count)
        .into_iter()
        .map(|i| eligible[i])
        .collect()
}

/// Build pools over ids `0..n_samples` from an explicit initial id list,
/// labeling the initial pool through the oracle.
pub fn init_pools_with_ids(
    n_samples: usize,
    initial: &[SampleId],
    oracle: &dyn LabelOracle,
) -> Result<PoolState> {
    if initial.is_empty() {
        return Err(PalError::EmptyLabeledPool);
    }
    let mut labeled = BTreeMap::new();
    for &id in initial {
        if id.index() >= n_samples {
            return Err(PalError::InvalidConfig(format!(
                "initial id {id} out of range for pool of {n_samples}"
            )));
        }
        if labeled.insert(id, oracle.label(id)).is_some() {
            return Err(PalError::InvalidConfig(format!(
                "initial id {id} listed twice"
            )));
        }
    }
    let unlabeled = (0..n_samples as u32)
        .map(SampleId)
        .filter(|id| !labeled.contains_key(id))
        .collect();
    Ok(PoolState { labeled, unlabeled })
}

/// Label a uniform-random initial fraction of the pool and leave the rest
/// unlabeled. The initial count is `round(fraction * n_samples)`
/// (half-up); a fraction that rounds to zero samples is rejected.
pub fn init_pools(
    n_samples: usize,
    initial_fraction: f64,
    seed: u64,
    oracle: &dyn LabelOracle,
) -> Result<PoolState> {
    if !(initial_fraction > 0.0 && initial_fraction <= 1.0) {
        return Err(PalError::InvalidConfig(format!(
            "initial_fraction must lie in (0, 1], got {initial_fraction}"
        )));
    }
    let count = initial_label_count(n_samples, initial_fraction);
    if count == 0 {
        return Err(PalError::InvalidConfig(format!(
            "initial_fraction {initial_fraction} of {n_samples} samples rounds to zero"
        )));
    }
    let all: Vec<SampleId> = (0..n_samples as u32).map(SampleId).collect();
    let initial = sample_initial_ids(&all, count, seed);
    init_pools_with_ids(n_samples, &initial, oracle)
}

/// Move queried ids from the unlabeled to the labeled pool, labeling each
/// through the oracle. Rejects ids that are not currently unlabeled; a
/// rejected commit leaves the pool untouched.
pub fn commit_query(
    pool: &mut PoolState,
    query: &[SampleId],
    oracle: &dyn LabelOracle,
) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &id in query {
        if !pool.unlabeled.contains(&id) {
            return Err(PalError::NotUnlabeled(id));
        }
        if !seen.insert(id) {
            return Err(PalError::InvalidConfig(format!("query lists {id} twice")));
        }
    }
    for &id in query {
        pool.unlabeled.remove(&id);
        pool.labeled.insert(id, oracle.label(id));
    }
    Ok(())
}

/// Per-round query budget: `query_size` samples split into
/// `subquery_count` equal blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryBudget {
    pub query_size: usize,
    pub subquery_count: usize,
}

impl QueryBudget {
    pub fn new(query_size: usize, subquery_count: usize) -> Result<Self> {
        let budget = Self {
            query_size,
            subquery_count,
        };
        budget.validate()?;
        Ok(budget)
    }

    pub fn validate(&self) -> Result<()> {
        if self.query_size == 0 {
            return Err(PalError::InvalidConfig(
                "query_size must be positive".into(),
            ));
        }
        if self.subquery_count == 0 {
            return Err(PalError::InvalidConfig(
                "subquery_count must be positive".into(),
            ));
        }
        if self.query_size % self.subquery_count != 0 {
            return Err(PalError::InvalidConfig(format!(
                "subquery_count ({}) must divide query_size ({}); refusing to truncate",
                self.subquery_count, self.query_size
            )));
        }
        Ok(())
    }

    /// Samples per sub-query.
    pub fn subquery_size(&self) -> usize {
        self.query_size / self.subquery_count
    }
}

/// Gradient optimizer used for network training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// Hyperparameters shared by training and selection. Fields omitted from
/// a serialized form fall back to the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparameters {
    /// Weight on the class-uncertainty score component.
    pub lambda1: f64,
    /// Weight on the diversity score component.
    pub lambda2: f64,
    /// Learning rate for the task network.
    pub task_lr: f32,
    /// Learning rate for the scoring network (and its fine-tuned clone).
    pub scoring_lr: f32,
    /// Training epochs for the task and scoring networks each round.
    pub epochs_main: usize,
    /// Epochs of self-supervised fine-tuning after each sub-query.
    pub epochs_finetune: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 1.0,
            task_lr: 0.01,
            scoring_lr: 0.01,
            epochs_main: 100,
            epochs_finetune: 10,
            batch_size: 64,
            optimizer: OptimizerKind::Sgd,
            seed: 0,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        if !self.lambda1.is_finite() || self.lambda1 < 0.0 {
            return Err(PalError::InvalidConfig(
                "lambda1 must be finite and non-negative".into(),
            ));
        }
        if !self.lambda2.is_finite() || self.lambda2 < 0.0 {
            return Err(PalError::InvalidConfig(
                "lambda2 must be finite and non-negative".into(),
            ));
        }
        for (name, lr) in [("task_lr", self.task_lr), ("scoring_lr", self.scoring_lr)] {
            if !(lr > 0.0 && lr <= 1.0) {
                return Err(PalError::InvalidConfig(format!(
                    "{name} must lie in (0, 1], got {lr}"
                )));
            }
        }
        if self.epochs_main == 0 {
            return Err(PalError::InvalidConfig(
                "epochs_main must be positive".into(),
            ));
        }
        if self.epochs_finetune == 0 {
            return Err(PalError::InvalidConfig(
                "epochs_finetune must be positive".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(PalError::InvalidConfig(
                "batch_size must be positive".into(),
            ));
        }
        Ok(())
    }
}
