//! Query strategies: the pretext-scored sub-query procedure (`pal_select`)
//! and the comparison baselines — uniform random, predictive-entropy, and
//! greedy-k-center core-set.
//!
//! All strategies are deterministic given their inputs and seed, return
//! exactly `query_size` unique unlabeled ids, and never touch true labels:
//! they see only images, the pool partition, and trained networks.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{ImageSet, ImageView, SampleId};
use crate::error::{PalError, Result};
use crate::nn::{clone_ssl, finetune_ssl, ScoringNetwork, TaskNetwork, TrainConfig};
use crate::pool::{Hyperparameters, PoolState, QueryBudget};
use crate::record::ScoreRecord;
use crate::scoring::{
    classification_confusion_score, combined_score, entropy_variant_score, hybrid_score,
    shannon_entropy, ssl_confusion_score, Pmf, RotationIndex,
};

/// Which query strategy to run.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Pal,
    Random,
    Entropy,
    Coreset,
}

impl StrategyKind {
    /// Stable lowercase name used in file names and reports.
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Pal => "pal",
            StrategyKind::Random => "random",
            StrategyKind::Entropy => "entropy",
            StrategyKind::Coreset => "coreset",
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A strategy plus everything it needs to run one query round.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub hyperparameters: Hyperparameters,
    pub budget: QueryBudget,
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        self.hyperparameters.validate()?;
        self.budget.validate()
    }
}

/// One round's worth of samples to label, in selection order, partitioned
/// into sub-query blocks.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Query {
    pub sample_ids: Vec<SampleId>,
    /// Exclusive end index of each block; the last entry equals
    /// `sample_ids.len()`.
    pub subquery_boundaries: Vec<usize>,
}

impl Query {
    /// Build a query of `subquery_count` equal blocks from an ordered id
    /// list, validating uniqueness and divisibility.
    pub fn new(sample_ids: Vec<SampleId>, subquery_count: usize) -> Result<Self> {
        let budget = QueryBudget::new(sample_ids.len(), subquery_count)?;
        let sub = budget.subquery_size();
        let boundaries = (1..=subquery_count).map(|k| k * sub).collect();
        let q = Self {
            sample_ids,
            subquery_boundaries: boundaries,
        };
        q.validate_shape(&budget)?;
        Ok(q)
    }

    /// Check the structural invariants against a budget.
    pub fn validate_shape(&self, budget: &QueryBudget) -> Result<()> {
        budget.validate()?;
        if self.sample_ids.len() != budget.query_size {
            return Err(PalError::InvalidConfig(format!(
                "query holds {} ids, budget says {}",
                self.sample_ids.len(),
                budget.query_size
            )));
        }
        let unique: BTreeSet<_> = self.sample_ids.iter().collect();
        if unique.len() != self.sample_ids.len() {
            return Err(PalError::InvalidConfig("query ids must be unique".into()));
        }
        let sub = budget.subquery_size();
        let expect: Vec<usize> = (1..=budget.subquery_count).map(|k| k * sub).collect();
        if self.subquery_boundaries != expect {
            return Err(PalError::InvalidConfig(format!(
                "subquery boundaries {:?} do not split {} ids into {} equal blocks",
                self.subquery_boundaries, budget.query_size, budget.subquery_count
            )));
        }
        Ok(())
    }

    /// Ids of block `k` (zero-based).
    pub fn block(&self, k: usize) -> &[SampleId] {
        let start = if k == 0 {
            0
        } else {
            self.subquery_boundaries[k - 1]
        };
        &self.sample_ids[start..self.subquery_boundaries[k]]
    }

    /// Number of blocks.
    pub fn block_count(&self) -> usize {
        self.subquery_boundaries.len()
    }
}

/// Output of [`pal_select`]: the query plus every score consulted along
/// the way, one record per still-unlabeled sample per sub-query.
#[derive(Debug, Clone, PartialEq)]
pub struct PalSelection {
    pub query: Query,
    /// Records ordered by (subquery, sample id); `round` is zero here and
    /// filled in by the caller that knows the round number.
    pub records: Vec<ScoreRecord>,
}

fn check_available(available: usize, needed: usize) -> Result<()> {
    if available < needed {
        return Err(PalError::InsufficientUnlabeled { needed, available });
    }
    Ok(())
}

/// Rotation-confusion scores for a batch of ids under one network.
fn batch_ssl_scores(
    net: &ScoringNetwork,
    images: &ImageSet,
    ids: &[SampleId],
) -> Result<Vec<f64>> {
    let mut per_rot = Vec::with_capacity(4);
    for rotation in RotationIndex::ALL {
        per_rot.push(net.predict_rotation_probs_batch(images, ids, rotation)?);
    }
    (0..ids.len())
        .map(|i| {
            let probs: [Pmf; 4] = std::array::from_fn(|r| per_rot[r][i].clone());
            ssl_confusion_score(&probs)
        })
        .collect()
}

/// Sort ids by score descending, ties by ascending id, and return the top
/// `count`.
fn top_by_score(ids: &[SampleId], scores: &[f64], count: usize) -> Vec<SampleId> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(ids[a].cmp(&ids[b])));
    order[..count].iter().map(|&i| ids[i]).collect()
}

/// Select one query with the pretext-scored sub-query procedure.
///
/// The rotation-confusion score and the class-confusion score are computed
/// once over the whole unlabeled pool and cached — the networks behind
/// them never change mid-query. The first block takes the top samples by
/// the hybrid score; before each later block, a clone of the scoring
/// network is fine-tuned on everything selected so far (rotation
/// self-supervision only) and the clone's rotation-confusion score joins
/// the ranking as the diversity term, steering later blocks away from
/// samples resembling earlier picks. When `lambda2` is zero the diversity
/// term has no weight, so fine-tuning is skipped entirely; the result is
/// identical to a single-block query.
pub fn pal_select(
    pool: &PoolState,
    images: &ImageSet,
    scoring_net: &ScoringNetwork,
    budget: &QueryBudget,
    hp: &Hyperparameters,
) -> Result<PalSelection> {
    budget.validate()?;
    hp.validate()?;
    let unlabeled = pool.unlabeled_ids();
    check_available(unlabeled.len(), budget.query_size)?;

    let s_ssl = batch_ssl_scores(scoring_net, images, &unlabeled)?;
    let cls_pmfs = scoring_net.predict_class_probs_batch(images, &unlabeled)?;
    let mut s_cls = Vec::with_capacity(unlabeled.len());
    let mut s_ent = Vec::with_capacity(unlabeled.len());
    for (i, pmf) in cls_pmfs.iter().enumerate() {
        s_cls.push(classification_confusion_score(pmf)?);
        s_ent.push(entropy_variant_score(s_ssl[i], pmf, hp.lambda1));
    }
    let cached: std::collections::BTreeMap<SampleId, (f64, f64, f64)> = unlabeled
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, (s_ssl[i], s_cls[i], s_ent[i])))
        .collect();

    let use_diversity = hp.lambda2 != 0.0;
    let sub = budget.subquery_size();
    let mut remaining = unlabeled;
    let mut selected: Vec<SampleId> = Vec::with_capacity(budget.query_size);
    let mut records = Vec::new();
    let mut clone = clone_ssl(scoring_net);

    for k in 1..=budget.subquery_count {
        let with_div = use_diversity && k >= 2;
        let s_div = if with_div {
            Some(batch_ssl_scores(&clone, images, &remaining)?)
        } else {
            None
        };
        let scores: Vec<f64> = remaining
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let (ssl, cls, _) = cached[id];
                match &s_div {
                    Some(d) => combined_score(ssl, cls, d[i], hp.lambda1, hp.lambda2),
                    None => hybrid_score(ssl, cls, hp.lambda1),
                }
            })
            .collect();
        for (i, &id) in remaining.iter().enumerate() {
            let (ssl, cls, ent) = cached[&id];
            records.push(ScoreRecord {
                sample: id,
                s_ssl: ssl,
                s_cls: cls,
                s_div: s_div.as_ref().map(|d| d[i]),
                s_combined: scores[i],
                s_entropy_variant: Some(ent),
                round: 0,
                subquery: k as u32,
            });
        }

        let picks = top_by_score(&remaining, &scores, sub);
        let picked: BTreeSet<SampleId> = picks.iter().copied().collect();
        remaining.retain(|id| !picked.contains(id));
        selected.extend(picks);

        // fine-tune for the next block; pointless after the last one or
        // when the diversity weight is zero
        if use_diversity && k < budget.subquery_count {
            let cfg = TrainConfig {
                seed: hp.seed.wrapping_add(k as u64),
                ..TrainConfig::for_finetune(hp)
            };
            clone = finetune_ssl(clone, &selected, images, &cfg)?;
        }
    }

    Ok(PalSelection {
        query: Query::new(selected, budget.subquery_count)?,
        records,
    })
}

/// Uniform sample without replacement from the unlabeled pool.
pub fn random_select(pool: &PoolState, budget: &QueryBudget, seed: u64) -> Result<Query> {
    budget.validate()?;
    let unlabeled = pool.unlabeled_ids();
    check_available(unlabeled.len(), budget.query_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, unlabeled.len(), budget.query_size)
        .into_iter()
        .map(|i| unlabeled[i])
        .collect();
    Query::new(picks, budget.subquery_count)
}

/// Top unlabeled samples by Shannon entropy of the task network's class
/// posterior; ties break by ascending id.
pub fn entropy_select(
    pool: &PoolState,
    images: &ImageSet,
    task_net: &TaskNetwork,
    budget: &QueryBudget,
) -> Result<Query> {
    budget.validate()?;
    let unlabeled = pool.unlabeled_ids();
    check_available(unlabeled.len(), budget.query_size)?;
    let pmfs = task_net.predict_class_probs_batch(images, &unlabeled)?;
    let entropies: Vec<f64> = pmfs.iter().map(shannon_entropy).collect();
    let picks = top_by_score(&unlabeled, &entropies, budget.query_size);
    Query::new(picks, budget.subquery_count)
}

/// Greedy k-center in an embedding space: repeatedly pick the unlabeled
/// sample farthest (Euclidean) from the labeled set plus everything picked
/// so far; ties break by ascending id.
pub fn coreset_select<F>(
    pool: &PoolState,
    images: &ImageSet,
    mut embed: F,
    budget: &QueryBudget,
) -> Result<Query>
where
    F: FnMut(ImageView<'_>) -> Result<Vec<f32>>,
{
    budget.validate()?;
    let unlabeled = pool.unlabeled_ids();
    check_available(unlabeled.len(), budget.query_size)?;
    let labeled = pool.labeled_ids();
    if labeled.is_empty() {
        return Err(PalError::EmptyLabeledPool);
    }

    let embed_of = |ids: &[SampleId], embed: &mut F| -> Result<Vec<Vec<f32>>> {
        ids.iter().map(|&id| embed(images.image(id))).collect()
    };
    let centers = embed_of(&labeled, &mut embed)?;
    let points = embed_of(&unlabeled, &mut embed)?;

    let dist2 = |a: &[f32], b: &[f32]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let d = (x - y) as f64;
                d * d
            })
            .sum()
    };

    let mut min_d2: Vec<f64> = points
        .iter()
        .map(|p| {
            centers
                .iter()
                .map(|c| dist2(p, c))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut taken = vec![false; unlabeled.len()];
    let mut picks = Vec::with_capacity(budget.query_size);
    for _ in 0..budget.query_size {
        // ids are sorted ascending, so strict > keeps the lowest id on ties
        let mut best = usize::MAX;
        for i in 0..unlabeled.len() {
            if !taken[i] && (best == usize::MAX || min_d2[i] > min_d2[best]) {
                best = i;
            }
        }
        taken[best] = true;
        picks.push(unlabeled[best]);
        for i in 0..unlabeled.len() {
            if !taken[i] {
                let d = dist2(&points[i], &points[best]);
                if d < min_d2[i] {
                    min_d2[i] = d;
                }
            }
        }
    }
    Query::new(picks, budget.subquery_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ClassLabel;
    use crate::nn::{train_scoring, train_task, Architecture};
    use crate::pool::{init_pools_with_ids, LabelOracle, OptimizerKind};
    use ndarray::Array3;
    use rand::Rng;

    struct VecOracle(Vec<ClassLabel>);
    impl LabelOracle for VecOracle {
        fn label(&self, id: SampleId) -> ClassLabel {
            self.0[id.index()]
        }
    }

    fn noisy_images(n: usize, side: usize, seed: u64) -> ImageSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let images = (0..n)
            .map(|i| {
                Array3::from_shape_fn((1, side, side), |(_, r, c)| {
                    let base = ((i % 4) as f32 * 0.2 + r as f32 * 0.03 + c as f32 * 0.01) % 1.0;
                    (base + rng.gen::<f32>() * 0.3).clamp(0.0, 1.0)
                })
            })
            .collect();
        ImageSet::from_images(images).unwrap()
    }

    /// Pool with the first `labeled` ids labeled, the rest unlabeled.
    fn split_pool(n: usize, labeled: usize) -> (ImageSet, PoolState, VecOracle) {
        let images = noisy_images(n, 8, 5);
        let labels: Vec<ClassLabel> = (0..n).map(|i| (i % 4) as u32).collect();
        let oracle = VecOracle(labels);
        let ids: Vec<SampleId> = (0..labeled as u32).map(SampleId).collect();
        let pool = init_pools_with_ids(n, &ids, &oracle).unwrap();
        (images, pool, oracle)
    }

    fn small_arch() -> Architecture {
        Architecture {
            input_channels: 1,
            input_side: 8,
            conv_channels: vec![4],
        }
    }

    fn trained_scoring(images: &ImageSet, pool: &PoolState) -> ScoringNetwork {
        let net = ScoringNetwork::new(small_arch(), 4, 0).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.03,
            epochs: 3,
            batch_size: 8,
            optimizer: OptimizerKind::Sgd,
            seed: 0,
        };
        train_scoring(&net, pool, images, &cfg).unwrap().0
    }

    fn hp(lambda1: f64, lambda2: f64) -> Hyperparameters {
        Hyperparameters {
            lambda1,
            lambda2,
            epochs_finetune: 3,
            batch_size: 8,
            ..Hyperparameters::default()
        }
    }

    #[test]
    fn query_structure_validation() {
        let ids: Vec<SampleId> = (0..20).map(SampleId).collect();
        let q = Query::new(ids.clone(), 4).unwrap();
        assert_eq!(q.subquery_boundaries, vec![5, 10, 15, 20]);
        assert_eq!(q.block(0), &ids[0..5]);
        assert_eq!(q.block(3), &ids[15..20]);
        assert_eq!(q.block_count(), 4);
        // K must divide N
        assert!(Query::new(ids.clone(), 3).is_err());
        // duplicates rejected
        let mut dup = ids;
        dup[1] = dup[0];
        assert!(Query::new(dup, 4).is_err());
    }

    #[test]
    fn pal_single_block_matches_brute_force_hybrid_ranking() {
        let (images, pool, _) = split_pool(30, 10);
        let net = trained_scoring(&images, &pool);
        let budget = QueryBudget::new(6, 1).unwrap();
        let sel = pal_select(&pool, &images, &net, &budget, &hp(1.0, 1.0)).unwrap();

        // independent ranking straight from single-sample predictions
        let mut expected: Vec<(SampleId, f64)> = pool
            .unlabeled_ids()
            .into_iter()
            .map(|id| {
                let probs: [Pmf; 4] = std::array::from_fn(|r| {
                    let rot = crate::scoring::rotate90(
                        images.image(id),
                        RotationIndex::new(r as u8).unwrap(),
                    )
                    .unwrap();
                    net.predict_rotation_probs(rot.view()).unwrap()
                });
                let ssl = ssl_confusion_score(&probs).unwrap();
                let cls = classification_confusion_score(
                    &net.predict_class_probs(images.image(id)).unwrap(),
                )
                .unwrap();
                (id, ssl + cls)
            })
            .collect();
        expected.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let expected_ids: Vec<SampleId> = expected[..6].iter().map(|&(id, _)| id).collect();
        assert_eq!(sel.query.sample_ids, expected_ids);

        // records cover the whole unlabeled pool once, with consistent sums
        assert_eq!(sel.records.len(), 20);
        for r in &sel.records {
            assert!(r.s_ssl <= 0.0 && r.s_ssl >= -4.0 - 1e-9);
            assert!(r.s_cls <= 1e-12);
            assert!(r.s_div.is_none());
            assert_eq!(r.s_combined, r.s_ssl + 1.0 * r.s_cls);
            assert_eq!(r.subquery, 1);
        }
    }

    #[test]
    fn pal_blocks_are_disjoint_unlabeled_and_deterministic() {
        let (images, pool, _) = split_pool(40, 12);
        let net = trained_scoring(&images, &pool);
        let budget = QueryBudget::new(12, 4).unwrap();
        let sel = pal_select(&pool, &images, &net, &budget, &hp(1.0, 1.0)).unwrap();
        sel.query.validate_shape(&budget).unwrap();
        let unlabeled: BTreeSet<SampleId> = pool.unlabeled_ids().into_iter().collect();
        for &id in &sel.query.sample_ids {
            assert!(unlabeled.contains(&id));
        }
        let unique: BTreeSet<_> = sel.query.sample_ids.iter().collect();
        assert_eq!(unique.len(), 12);

        // each later sub-query scores exactly the ids not yet picked
        let mut picked = BTreeSet::new();
        for k in 1..=4u32 {
            let scored: BTreeSet<SampleId> = sel
                .records
                .iter()
                .filter(|r| r.subquery == k)
                .map(|r| r.sample)
                .collect();
            assert_eq!(scored.len(), 28 - (k as usize - 1) * 3);
            for id in &picked {
                assert!(!scored.contains(id));
            }
            if k >= 2 {
                for r in sel.records.iter().filter(|r| r.subquery == k) {
                    let d = r.s_div.expect("later blocks carry the diversity term");
                    assert!((-4.0 - 1e-9..=1e-12).contains(&d));
                    assert_eq!(r.s_combined, r.s_ssl + r.s_cls + d);
                }
            }
            picked.extend(sel.query.block(k as usize - 1).iter().copied());
        }

        let again = pal_select(&pool, &images, &net, &budget, &hp(1.0, 1.0)).unwrap();
        assert_eq!(again, sel);
    }

    #[test]
    fn pal_zero_lambda2_equals_single_block() {
        let (images, pool, _) = split_pool(36, 12);
        let net = trained_scoring(&images, &pool);
        let multi = pal_select(
            &pool,
            &images,
            &net,
            &QueryBudget::new(12, 4).unwrap(),
            &hp(1.0, 0.0),
        )
        .unwrap();
        let single = pal_select(
            &pool,
            &images,
            &net,
            &QueryBudget::new(12, 1).unwrap(),
            &hp(1.0, 0.0),
        )
        .unwrap();
        let a: BTreeSet<SampleId> = multi.query.sample_ids.iter().copied().collect();
        let b: BTreeSet<SampleId> = single.query.sample_ids.iter().copied().collect();
        assert_eq!(a, b);
        // with zero weight the diversity term is never materialized
        assert!(multi.records.iter().all(|r| r.s_div.is_none()));
    }

    #[test]
    fn pal_rejects_insufficient_pool_before_work() {
        let (images, pool, _) = split_pool(12, 8);
        let net = trained_scoring(&images, &pool);
        let budget = QueryBudget::new(8, 2).unwrap();
        let err = pal_select(&pool, &images, &net, &budget, &hp(1.0, 1.0)).unwrap_err();
        match err {
            PalError::InsufficientUnlabeled { needed, available } => {
                assert_eq!((needed, available), (8, 4));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn random_select_is_seeded_and_uniform() {
        let (_, pool, _) = split_pool(20, 10);
        let budget = QueryBudget::new(4, 2).unwrap();
        let a = random_select(&pool, &budget, 7).unwrap();
        let b = random_select(&pool, &budget, 7).unwrap();
        assert_eq!(a, b);
        let c = random_select(&pool, &budget, 8).unwrap();
        assert_ne!(a.sample_ids, c.sample_ids);

        // whole pool when N = |unlabeled|
        let all = random_select(&pool, &QueryBudget::new(10, 1).unwrap(), 3).unwrap();
        let got: BTreeSet<_> = all.sample_ids.iter().copied().collect();
        let want: BTreeSet<_> = pool.unlabeled_ids().into_iter().collect();
        assert_eq!(got, want);

        // binomial check: each of 10 samples picked with frequency 0.1
        let one = QueryBudget::new(1, 1).unwrap();
        let mut counts = std::collections::BTreeMap::<SampleId, u32>::new();
        let trials = 10_000;
        for seed in 0..trials {
            let q = random_select(&pool, &one, seed).unwrap();
            *counts.entry(q.sample_ids[0]).or_insert(0) += 1;
        }
        let sigma = (0.1 * 0.9 / trials as f64).sqrt();
        for id in pool.unlabeled_ids() {
            let f = *counts.get(&id).unwrap_or(&0) as f64 / trials as f64;
            assert!(
                (f - 0.1).abs() <= 3.0 * sigma,
                "sample {id} frequency {f} outside 3 sigma"
            );
        }
    }

    #[test]
    fn entropy_select_prefers_uncertain_and_breaks_ties_by_id() {
        let (images, pool, _) = split_pool(24, 8);
        let labels: Vec<ClassLabel> = (0..24).map(|i| (i % 4) as u32).collect();
        let net = TaskNetwork::new(small_arch(), 4, 0).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.03,
            epochs: 5,
            batch_size: 8,
            optimizer: OptimizerKind::Sgd,
            seed: 0,
        };
        let (trained, _) = train_task(&net, &pool, &images, &cfg).unwrap();
        let _ = labels;
        let budget = QueryBudget::new(5, 1).unwrap();
        let q = entropy_select(&pool, &images, &trained, &budget).unwrap();

        // brute-force oracle over single-sample predictions
        let mut expected: Vec<(SampleId, f64)> = pool
            .unlabeled_ids()
            .into_iter()
            .map(|id| {
                let p = trained.predict_class_probs(images.image(id)).unwrap();
                (id, shannon_entropy(&p))
            })
            .collect();
        expected.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let expected_ids: Vec<SampleId> = expected[..5].iter().map(|&(id, _)| id).collect();
        assert_eq!(q.sample_ids, expected_ids);

        // uniform predictions everywhere -> lowest unlabeled ids win
        let mut zeroed = trained;
        zeroed.zero_final_layer();
        let q = entropy_select(&pool, &images, &zeroed, &budget).unwrap();
        let lowest: Vec<SampleId> = pool.unlabeled_ids()[..5].to_vec();
        assert_eq!(q.sample_ids, lowest);
    }

    /// Images whose single pixel encodes a 1-D embedding directly.
    fn pixel_images(values: &[f32]) -> ImageSet {
        let images = values
            .iter()
            .map(|&v| Array3::from_elem((1, 1, 1), v))
            .collect();
        ImageSet::from_images(images).unwrap()
    }

    #[test]
    fn coreset_picks_farthest_points() {
        // embeddings: id0 -> 0.0 (labeled), id1 -> 1.0, id2 -> 10.0
        let images = pixel_images(&[0.0, 0.1, 1.0]);
        let oracle = VecOracle(vec![0, 0, 0]);
        let pool = init_pools_with_ids(3, &[SampleId(0)], &oracle).unwrap();
        let embed = |img: ImageView<'_>| Ok(vec![img[[0, 0, 0]] * 10.0]);

        let one = coreset_select(&pool, &images, embed, &QueryBudget::new(1, 1).unwrap()).unwrap();
        assert_eq!(one.sample_ids, vec![SampleId(2)]);

        let two = coreset_select(&pool, &images, embed, &QueryBudget::new(2, 1).unwrap()).unwrap();
        assert_eq!(two.sample_ids, vec![SampleId(2), SampleId(1)]);
    }

    #[test]
    fn coreset_covering_radius_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let n = 12;
            let coords: Vec<[f32; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
            // encode 2-D embeddings in a 1x1x2-channel... side must be square;
            // use 2 channels of a 1x1 image
            let images = ImageSet::from_images(
                coords
                    .iter()
                    .map(|c| {
                        Array3::from_shape_fn((2, 1, 1), |(ch, _, _)| c[ch])
                    })
                    .collect(),
            )
            .unwrap();
            let oracle = VecOracle(vec![0; n]);
            let labeled: Vec<SampleId> = (0..3).map(SampleId).collect();
            let pool = init_pools_with_ids(n, &labeled, &oracle).unwrap();
            let embed = |img: ImageView<'_>| Ok(vec![img[[0, 0, 0]], img[[1, 0, 0]]]);
            let q = coreset_select(&pool, &images, embed, &QueryBudget::new(6, 1).unwrap())
                .unwrap();

            let d = |a: SampleId, b: SampleId| -> f64 {
                let (pa, pb) = (coords[a.index()], coords[b.index()]);
                (((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)) as f64).sqrt()
            };
            let mut centers: Vec<SampleId> = labeled.clone();
            let mut last_radius = f64::INFINITY;
            for &pick in &q.sample_ids {
                centers.push(pick);
                let radius = pool
                    .unlabeled_ids()
                    .iter()
                    .filter(|id| !centers.contains(id))
                    .map(|&id| {
                        centers
                            .iter()
                            .map(|&c| d(id, c))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(0.0, f64::max);
                assert!(radius <= last_radius + 1e-12);
                last_radius = radius;
            }
        }
    }
}
