//! The multi-round experiment loop: load or generate a dataset, split off
//! a held-out evaluation set, build oracles and initial pools shared
//! across strategies, then run each (strategy, seed) combination
//! independently — optionally in parallel — collecting run logs, query
//! manifests, and (for the pretext strategy) per-round score records.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::dataset::{ClassLabel, Dataset, SampleId};
use crate::error::{PalError, Result};
use crate::nn::{
    train_scoring, train_task, Architecture, ScoringNetwork, TaskNetwork, TrainConfig,
};
use crate::pool::{
    commit_query, initial_label_count, Hyperparameters, PoolState, QueryBudget,
};
use crate::record::{QueryManifest, RoundRecord, RunLog, ScoreRecord, SummaryRow};
use crate::selection::{
    coreset_select, entropy_select, pal_select, random_select, Query, StrategyConfig,
    StrategyKind,
};
use crate::simulate::{
    evaluate_accuracy, make_biased_pool, make_oracle, stratified_split, Oracle,
};

/// Where the experiment's images come from.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DatasetSource {
    /// Generate the synthetic pattern dataset in-process.
    Synthetic {
        class_count: u32,
        samples_per_class: usize,
        image_size: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Load a dataset directory written in the manifest format.
    Manifest { path: PathBuf },
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_subquery_count() -> usize {
    4
}

fn default_conv_channels() -> Vec<usize> {
    vec![8, 16]
}

/// A full experiment description, loadable from JSON. Fractions are
/// relative to the pool universe (the dataset minus the held-out split).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentPlan {
    pub dataset: DatasetSource,
    /// Fraction of the pool labeled before the first round.
    pub initial_fraction: f64,
    /// Fraction of the pool queried each round.
    pub query_fraction: f64,
    pub round_count: usize,
    pub strategies: Vec<StrategyKind>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub noise_rate: f64,
    #[serde(default)]
    pub excluded_classes: BTreeSet<ClassLabel>,
    #[serde(default = "default_subquery_count")]
    pub subquery_count: usize,
    /// Fraction of the dataset held out for accuracy evaluation.
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    /// Conv-block widths of both networks' backbone.
    #[serde(default = "default_conv_channels")]
    pub conv_channels: Vec<usize>,
}

impl ExperimentPlan {
    /// Structural checks that need no dataset: fractions, counts, seeds.
    /// Dataset-dependent checks (class ranges, budget divisibility) happen
    /// during preparation.
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("initial_fraction", self.initial_fraction),
            ("query_fraction", self.query_fraction),
        ] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(PalError::InvalidConfig(format!(
                    "{name} must be in (0, 1], got {f}"
                )));
            }
        }
        if self.round_count == 0 {
            return Err(PalError::InvalidConfig("round_count must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(PalError::InvalidConfig("no strategies listed".into()));
        }
        let unique_strategies: BTreeSet<_> = self.strategies.iter().collect();
        if unique_strategies.len() != self.strategies.len() {
            return Err(PalError::InvalidConfig("duplicate strategies listed".into()));
        }
        if self.seeds.is_empty() {
            return Err(PalError::InvalidConfig("no seeds listed".into()));
        }
        let unique_seeds: BTreeSet<_> = self.seeds.iter().collect();
        if unique_seeds.len() != self.seeds.len() {
            return Err(PalError::InvalidConfig("duplicate seeds listed".into()));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(PalError::InvalidConfig(format!(
                "noise_rate must be in [0, 1), got {}",
                self.noise_rate
            )));
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return Err(PalError::InvalidConfig(format!(
                "test_fraction must be in [0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.subquery_count == 0 {
            return Err(PalError::InvalidConfig("subquery_count must be at least 1".into()));
        }
        self.hyperparameters.validate()?;
        if let DatasetSource::Synthetic {
            class_count,
            samples_per_class,
            image_size,
            ..
        } = &self.dataset
        {
            if *class_count == 0 || *samples_per_class == 0 {
                return Err(PalError::InvalidConfig(
                    "synthetic dataset needs positive class and sample counts".into(),
                ));
            }
            if *image_size < 8 {
                return Err(PalError::InvalidConfig(format!(
                    "image_size must be at least 8, got {image_size}"
                )));
            }
        }
        Ok(())
    }

    /// Read and validate a plan from a JSON file.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let plan: Self = serde_json::from_str(&text)
            .map_err(|e| PalError::InvalidConfig(format!("plan file: {e}")))?;
        plan.validate()?;
        Ok(plan)
    }

    fn materialize_dataset(&self) -> Result<Dataset> {
        match &self.dataset {
            DatasetSource::Synthetic {
                class_count,
                samples_per_class,
                image_size,
                seed,
            } => super::generate_synthetic_dataset(
                *class_count,
                *samples_per_class,
                *image_size,
                *seed,
            ),
            DatasetSource::Manifest { path } => crate::dataset::load_dataset(path),
        }
    }
}

/// Everything produced by one (strategy, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub log: RunLog,
    /// Accuracy of a model trained on the initial pool alone.
    pub initial_accuracy: f64,
    /// The shared initial labeled pool (pool-universe ids).
    pub initial_labeled: Vec<SampleId>,
    /// Per-round score records; empty for the baselines.
    pub score_records: Vec<ScoreRecord>,
    pub queries: Vec<QueryManifest>,
}

/// One run's result; failures are isolated here rather than aborting the
/// whole plan.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub strategy: StrategyKind,
    pub seed: u64,
    pub outcome: std::result::Result<RunArtifacts, String>,
}

/// All runs of a plan plus shared context useful for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutputs {
    pub class_count: u32,
    pub train_len: usize,
    pub test_len: usize,
    pub budget: QueryBudget,
    pub runs: Vec<RunOutcome>,
}

impl PlanOutputs {
    /// True when every run finished.
    pub fn all_succeeded(&self) -> bool {
        self.runs.iter().all(|r| r.outcome.is_ok())
    }

    /// One row per successful run round, in (strategy, seed, round) order.
    pub fn summary_rows(&self) -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for run in &self.runs {
            if let Ok(art) = &run.outcome {
                for round in &art.log.rounds {
                    rows.push(SummaryRow {
                        strategy: run.strategy.name().to_string(),
                        seed: run.seed,
                        round: round.round_index,
                        labeled_fraction: round.labeled_fraction,
                        accuracy: round.task_accuracy,
                    });
                }
            }
        }
        rows
    }
}

/// Shared per-seed context: split, oracle, and initial pool are identical
/// for every strategy compared under that seed.
struct SeedContext {
    seed: u64,
    train: Dataset,
    test: Dataset,
    oracle: Oracle,
    initial_pool: PoolState,
    budget: QueryBudget,
}

fn prepare_seed(plan: &ExperimentPlan, dataset: &Dataset, seed: u64) -> Result<SeedContext> {
    let split = stratified_split(dataset, plan.test_fraction, seed)?;
    if split.test.is_empty() {
        return Err(PalError::InvalidConfig(
            "test_fraction leaves no evaluation samples".into(),
        ));
    }
    let train = dataset.subset(&split.train);
    let test = dataset.subset(&split.test);
    let oracle = make_oracle(&train, plan.noise_rate, seed)?;
    let initial_pool = make_biased_pool(
        &train,
        plan.initial_fraction,
        &plan.excluded_classes,
        seed,
        &oracle,
    )?;
    let query_size = initial_label_count(train.len(), plan.query_fraction);
    let budget = QueryBudget::new(query_size, plan.subquery_count)?;
    Ok(SeedContext {
        seed,
        train,
        test,
        oracle,
        initial_pool,
        budget,
    })
}

/// Seed for everything that happens in a given round, derived so that
/// rounds draw fresh randomness while strategies under comparison stay in
/// lockstep.
fn round_seed(run_seed: u64, round: usize) -> u64 {
    run_seed.wrapping_add((round as u64) << 20)
}

fn class_counts(query: &Query, train: &Dataset) -> Vec<u32> {
    let mut counts = vec![0u32; train.class_count as usize];
    for &id in &query.sample_ids {
        counts[train.true_label(id) as usize] += 1;
    }
    counts
}

fn execute_run(
    plan: &ExperimentPlan,
    ctx: &SeedContext,
    strategy: StrategyKind,
) -> Result<RunArtifacts> {
    let arch = Architecture {
        input_channels: ctx.train.images.channels(),
        input_side: ctx.train.images.side(),
        conv_channels: plan.conv_channels.clone(),
    };
    let class_count = ctx.train.class_count;
    let task_template = TaskNetwork::new(arch.clone(), class_count, 0)?;
    let scoring_template = ScoringNetwork::new(arch, class_count, 0)?;
    let config = StrategyConfig {
        kind: strategy,
        hyperparameters: Hyperparameters {
            seed: ctx.seed,
            ..plan.hyperparameters.clone()
        },
        budget: ctx.budget,
    };
    config.validate()?;

    let test_ids: Vec<SampleId> = ctx.test.ids().collect();
    let images = &ctx.train.images;
    let mut pool = ctx.initial_pool.clone();

    // model trained on the pool as it stands; refreshed after each commit
    let mut task = {
        let hp0 = Hyperparameters {
            seed: ctx.seed,
            ..config.hyperparameters.clone()
        };
        train_task(&task_template, &pool, images, &TrainConfig::for_task(&hp0))?.0
    };
    let initial_accuracy =
        evaluate_accuracy(&task, &ctx.test.images, &test_ids, &ctx.test.true_labels)?;

    let mut rounds = Vec::with_capacity(plan.round_count);
    let mut queries = Vec::new();
    let mut score_records = Vec::new();

    for round in 1..=plan.round_count {
        let start = Instant::now();
        let hp = Hyperparameters {
            seed: round_seed(ctx.seed, round),
            ..config.hyperparameters.clone()
        };
        let query = match strategy {
            StrategyKind::Pal => {
                let (scoring, _) = train_scoring(
                    &scoring_template,
                    &pool,
                    images,
                    &TrainConfig::for_scoring(&hp),
                )?;
                let mut selection = pal_select(&pool, images, &scoring, &ctx.budget, &hp)?;
                for record in &mut selection.records {
                    record.round = round as u32;
                }
                score_records.append(&mut selection.records);
                selection.query
            }
            StrategyKind::Random => random_select(&pool, &ctx.budget, hp.seed)?,
            StrategyKind::Entropy => entropy_select(&pool, images, &task, &ctx.budget)?,
            StrategyKind::Coreset => {
                coreset_select(&pool, images, |img| task.embed(img), &ctx.budget)?
            }
        };
        commit_query(&mut pool, &query.sample_ids, &ctx.oracle)?;
        task = train_task(&task_template, &pool, images, &TrainConfig::for_task(&hp))?.0;
        let accuracy =
            evaluate_accuracy(&task, &ctx.test.images, &test_ids, &ctx.test.true_labels)?;

        queries.push(QueryManifest {
            round: round as u32,
            strategy: strategy.name().to_string(),
            ids: query.sample_ids.clone(),
            subquery_boundaries: query.subquery_boundaries.clone(),
            seed: hp.seed,
        });
        rounds.push(RoundRecord {
            round_index: round as u32,
            labeled_fraction: pool.labeled_fraction(),
            task_accuracy: accuracy,
            query_class_counts: class_counts(&query, &ctx.train),
            query_sample_ids: query.sample_ids,
            wall_time_secs: start.elapsed().as_secs_f64(),
        });
    }

    let log = RunLog {
        strategy: strategy.name().to_string(),
        seed: ctx.seed,
        rounds,
    };
    log.validate()?;
    Ok(RunArtifacts {
        log,
        initial_accuracy,
        initial_labeled: ctx.initial_pool.labeled_ids(),
        score_records,
        queries,
    })
}

/// Run every (strategy, seed) combination sequentially.
pub fn run_active_learning(plan: &ExperimentPlan) -> Result<PlanOutputs> {
    run_active_learning_jobs(plan, 1)
}

/// Run every (strategy, seed) combination, at most `jobs` at a time.
/// Preparation failures (bad plan, bad dataset, bad budget) abort with an
/// error before any run starts; failures inside a run are recorded in that
/// run's outcome and do not disturb the others. Results are identical for
/// any `jobs` value.
pub fn run_active_learning_jobs(plan: &ExperimentPlan, jobs: usize) -> Result<PlanOutputs> {
    plan.validate()?;
    if jobs == 0 {
        return Err(PalError::InvalidConfig("jobs must be at least 1".into()));
    }
    let dataset = plan.materialize_dataset()?;
    if let Some(&c) = plan
        .excluded_classes
        .iter()
        .find(|&&c| c >= dataset.class_count)
    {
        return Err(PalError::InvalidConfig(format!(
            "excluded class {c} out of range for {} classes",
            dataset.class_count
        )));
    }
    let contexts: Vec<SeedContext> = plan
        .seeds
        .iter()
        .map(|&seed| prepare_seed(plan, &dataset, seed))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, StrategyKind)> = contexts
        .iter()
        .enumerate()
        .flat_map(|(ci, _)| plan.strategies.iter().map(move |&s| (ci, s)))
        .collect();

    let mut slots: Vec<Option<RunOutcome>> = vec![None; pairs.len()];
    if jobs == 1 {
        for (slot, &(ci, strategy)) in slots.iter_mut().zip(&pairs) {
            *slot = Some(run_one(plan, &contexts[ci], strategy));
        }
    } else {
        let next = AtomicUsize::new(0);
        let results = Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(pairs.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= pairs.len() {
                        break;
                    }
                    let (ci, strategy) = pairs[i];
                    let outcome = run_one(plan, &contexts[ci], strategy);
                    results.lock().unwrap()[i] = Some(outcome);
                });
            }
        });
    }

    let runs = slots.into_iter().map(|s| s.expect("run executed")).collect();
    let ctx0 = &contexts[0];
    Ok(PlanOutputs {
        class_count: dataset.class_count,
        train_len: ctx0.train.len(),
        test_len: ctx0.test.len(),
        budget: ctx0.budget,
        runs,
    })
}

fn run_one(plan: &ExperimentPlan, ctx: &SeedContext, strategy: StrategyKind) -> RunOutcome {
    RunOutcome {
        strategy,
        seed: ctx.seed,
        outcome: execute_run(plan, ctx, strategy).map_err(|e| e.to_string()),
    }
}
