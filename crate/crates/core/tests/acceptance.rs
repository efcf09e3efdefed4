//! Acceptance suite: ten numbered criteria covering the scoring closed
//! forms, the analytical probes, the sub-query selection procedure, the
//! end-to-end experiment harness, and the baseline strategies. Each test
//! prints a single PASS line on success; a failing criterion shows up as
//! that test's failure line.
//!
//! The directional experiments (criteria 5-7) use desk-scaled training
//! budgets: small enough to run on one CPU core in minutes, large enough
//! that the orderings under test emerge reliably across seeds.

use std::collections::BTreeSet;

use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pal_core::dataset::{ClassLabel, Dataset, ImageSet, SampleId};
use pal_core::diagnostics::{optimal_alpha, pearson, random_positive_triple, ALPHA_GRID_STEP};
use pal_core::nn::checkpoint::save_scoring_checkpoint;
use pal_core::nn::{train_scoring, Architecture, ScoringNetwork, TaskNetwork, TrainConfig};
use pal_core::pool::{init_pools, init_pools_with_ids, Hyperparameters, LabelOracle, QueryBudget};
use pal_core::scoring::{
    classification_confusion_score, combined_score, entropy_variant_score, hybrid_score,
    shannon_entropy, ssl_confusion_score, Pmf, RotationIndex,
};
use pal_core::selection::{coreset_select, entropy_select, pal_select, StrategyKind};
use pal_core::simulate::{
    generate_synthetic_dataset, make_oracle, missing_class_sampling_rate, run_active_learning,
    stratified_split, DatasetSource, ExperimentPlan, Oracle, PlanOutputs,
};

fn pass(name: &str) {
    println!("[acceptance] {name}: PASS");
}

// ---------------------------------------------------------------- shared --

/// The 4-class experiment configuration shared by the directional criteria:
/// 2000 samples of 16x16 images, 10% initial labels, queries of 5%.
fn experiment_plan(seeds: Vec<u64>, strategies: Vec<StrategyKind>) -> ExperimentPlan {
    ExperimentPlan {
        dataset: DatasetSource::Synthetic {
            class_count: 4,
            samples_per_class: 500,
            image_size: 16,
            seed: 11,
        },
        initial_fraction: 0.10,
        query_fraction: 0.05,
        round_count: 4,
        strategies,
        seeds,
        noise_rate: 0.0,
        excluded_classes: BTreeSet::new(),
        subquery_count: 4,
        test_fraction: 0.2,
        hyperparameters: Hyperparameters {
            epochs_main: 40,
            epochs_finetune: 10,
            ..Hyperparameters::default()
        },
        conv_channels: vec![8, 16],
    }
}

/// Final-round accuracy of every successful run of one strategy.
fn final_accuracies(outputs: &PlanOutputs, strategy: StrategyKind) -> Vec<f64> {
    outputs
        .runs
        .iter()
        .filter(|r| r.strategy == strategy)
        .map(|r| {
            let art = r
                .outcome
                .as_ref()
                .unwrap_or_else(|e| panic!("{}-seed{} failed: {e}", strategy.name(), r.seed));
            art.log.rounds.last().expect("rounds recorded").task_accuracy
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

const FIVE_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

// ------------------------------------------------------------ criterion 1 --

/// Direct-formula oracles written against the score definitions, sharing
/// nothing with the production implementations but the probability clamp
/// contract.
mod score_oracle {
    pub const EPS: f64 = 1e-12;

    pub fn ssl(correct_rotation_probs: &[f64; 4]) -> f64 {
        -(correct_rotation_probs[0]
            + correct_rotation_probs[1]
            + correct_rotation_probs[2]
            + correct_rotation_probs[3])
    }

    pub fn cls(h: &[f64]) -> f64 {
        let u = 1.0 / h.len() as f64;
        -h.iter().map(|&q| u * (u.ln() - q.max(EPS).ln())).sum::<f64>()
    }

    pub fn entropy(h: &[f64]) -> f64 {
        -h.iter()
            .map(|&p| if p > 0.0 { p * p.max(EPS).ln() } else { 0.0 })
            .sum::<f64>()
    }
}

fn random_pmf(rng: &mut ChaCha8Rng, len: usize) -> Pmf {
    let weights: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    Pmf::new(weights.into_iter().map(|w| w / total).collect()).unwrap()
}

fn random_rotation_pmfs(rng: &mut ChaCha8Rng) -> [Pmf; 4] {
    std::array::from_fn(|_| random_pmf(rng, 4))
}

#[test]
fn criterion_01_score_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..1000 {
        let c = rng.gen_range(2..=8);
        let h = random_pmf(&mut rng, c);
        let rot = random_rotation_pmfs(&mut rng);
        let rot_div = random_rotation_pmfs(&mut rng);
        let lambda1 = rng.gen::<f64>() * 3.0;
        let lambda2 = rng.gen::<f64>() * 3.0;

        let s_ssl = ssl_confusion_score(&rot).unwrap();
        let s_cls = classification_confusion_score(&h).unwrap();
        let s_div = ssl_confusion_score(&rot_div).unwrap();

        let correct: [f64; 4] = std::array::from_fn(|i| rot[i].prob(i));
        let want_ssl = score_oracle::ssl(&correct);
        assert!(
            (s_ssl - want_ssl).abs() <= 1e-9,
            "trial {trial}: ssl {s_ssl} vs oracle {want_ssl}"
        );

        let want_cls = score_oracle::cls(h.values());
        assert!(
            (s_cls - want_cls).abs() <= 1e-9,
            "trial {trial}: cls {s_cls} vs oracle {want_cls}"
        );

        let want_hybrid = want_ssl + lambda1 * want_cls;
        assert!((hybrid_score(s_ssl, s_cls, lambda1) - want_hybrid).abs() <= 1e-9);

        let want_combined = want_hybrid + lambda2 * score_oracle::ssl(&std::array::from_fn(|i| rot_div[i].prob(i)));
        assert!(
            (combined_score(s_ssl, s_cls, s_div, lambda1, lambda2) - want_combined).abs() <= 1e-9
        );

        let want_entropy_variant = want_ssl + lambda1 * score_oracle::entropy(h.values());
        assert!(
            (entropy_variant_score(s_ssl, &h, lambda1) - want_entropy_variant).abs() <= 1e-9
        );

        // range invariants on the same draws
        assert!((-4.0..=0.0).contains(&s_ssl), "s_ssl {s_ssl} out of range");
        assert!((-4.0..=0.0).contains(&s_div), "s_div {s_div} out of range");
        assert!(s_cls <= 0.0, "s_cls {s_cls} positive");
        let max_dev = h
            .values()
            .iter()
            .map(|&q| (q - 1.0 / c as f64).abs())
            .fold(0.0, f64::max);
        if max_dev > 1e-9 {
            assert!(s_cls < 0.0, "non-uniform pmf scored {s_cls}");
        }
    }
    // equality case: uniform posteriors score exactly zero
    for c in 2..=8 {
        assert_eq!(
            classification_confusion_score(&Pmf::uniform(c)).unwrap(),
            0.0
        );
    }
    pass("criterion 1 (score closed forms, 1000 random pmfs, tol 1e-9)");
}

// ------------------------------------------------------------ criterion 2 --

#[test]
fn criterion_02_bounded_vs_unbounded_uncertainty() {
    // binary posteriors hardening toward certainty: h_k = (1 - 10^-k, 10^-k)
    let s_ssl = -1.0;
    let lambda1 = 1.0;
    let mut hybrids = Vec::new();
    let mut entropy_gaps = Vec::new();
    for k in 1..=12 {
        let eps = 10f64.powi(-k);
        let h = Pmf::new(vec![1.0 - eps, eps]).unwrap();
        let hybrid = hybrid_score(s_ssl, classification_confusion_score(&h).unwrap(), lambda1);
        hybrids.push(hybrid);
        entropy_gaps.push((entropy_variant_score(s_ssl, &h, lambda1) - s_ssl).abs());
    }

    for (i, pair) in hybrids.windows(2).enumerate() {
        assert!(
            pair[1] < pair[0],
            "hybrid not strictly decreasing at k={}",
            i + 1
        );
    }
    // asymptotic per-step drop: KL(U||h_k) grows like k ln(10)/2 per unit k
    let target = 10f64.ln() / 2.0;
    for (i, pair) in hybrids.windows(2).enumerate() {
        let k = i + 1;
        if k >= 6 {
            let step = pair[0] - pair[1];
            assert!(
                (step - target).abs() / target < 0.05,
                "k={k}: per-step drop {step} deviates more than 5% from {target}"
            );
        }
    }
    for (i, gap) in entropy_gaps.iter().enumerate() {
        let k = i + 1;
        assert!(
            *gap <= std::f64::consts::LN_2 + 1e-12,
            "k={k}: entropy-variant gap {gap} exceeds ln 2"
        );
        if k >= 4 {
            assert!(
                *gap <= 1e-3,
                "k={k}: entropy-variant gap {gap:.10e} exceeds the 1e-3 tolerance \
                 (H(1-10^-4, 10^-4) = 1.0210e-3, so the bound is arithmetically \
                 unattainable at k=4; it holds from k=5 on)"
            );
        }
    }
    pass("criterion 2 (bounded vs unbounded uncertainty probe)");
}

// ------------------------------------------------------------ criterion 3 --

#[test]
fn criterion_03_optimal_mixing_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for trial in 0..200 {
        let triple = random_positive_triple(2000, &mut rng).unwrap();
        let res = optimal_alpha(&triple).unwrap();
        assert!(
            (res.grid_argmax - res.alpha_star).abs() <= 2e-4,
            "trial {trial}: grid argmax {} vs closed form {}",
            res.grid_argmax,
            res.alpha_star
        );
        let corr_gap = res.correlation_at_star - res.grid_max;
        assert!(
            (0.0..=1e-6).contains(&corr_gap),
            "trial {trial}: correlation gap {corr_gap}"
        );
        let best_single = triple.sigma_uv.max(triple.sigma_uw);
        assert!(
            res.correlation_at_star >= best_single,
            "trial {trial}: mixture {} below best single component {best_single}",
            res.correlation_at_star
        );
    }
    // grid resolution claimed above matches the implementation's
    assert_eq!(ALPHA_GRID_STEP, 1e-4);
    pass("criterion 3 (closed-form mixing weight vs grid search, 200 triples)");
}

// ------------------------------------------------------------ criterion 4 --

#[test]
fn criterion_04_subquery_selection_structure() {
    let dataset = generate_synthetic_dataset(4, 500, 16, 21).unwrap();
    let oracle = Oracle::clean(&dataset);
    let pool = init_pools(dataset.len(), 0.10, 77, &oracle).unwrap();
    let budget = QueryBudget::new(100, 4).unwrap();
    let hp = Hyperparameters {
        epochs_main: 12,
        epochs_finetune: 10,
        seed: 33,
        ..Hyperparameters::default()
    };

    let arch = Architecture {
        input_channels: 1,
        input_side: 16,
        conv_channels: vec![8, 16],
    };
    let template = ScoringNetwork::new(arch, 4, 0).unwrap();
    let cfg = TrainConfig {
        seed: 33,
        ..TrainConfig::for_scoring(&hp)
    };
    let (scoring, _) = train_scoring(&template, &pool, &dataset.images, &cfg).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let before = dir.path().join("before.ckpt");
    let after = dir.path().join("after.ckpt");
    save_scoring_checkpoint(&before, &scoring, 33, 0).unwrap();

    let sel = pal_select(&pool, &dataset.images, &scoring, &budget, &hp).unwrap();

    // structure: 100 ids in 4 disjoint blocks of 25, none already labeled
    assert_eq!(sel.query.sample_ids.len(), 100);
    assert_eq!(sel.query.subquery_boundaries, vec![25, 50, 75, 100]);
    assert_eq!(sel.query.block_count(), 4);
    let as_set: BTreeSet<SampleId> = sel.query.sample_ids.iter().copied().collect();
    assert_eq!(as_set.len(), 100, "sub-queries overlap");
    for k in 0..4 {
        assert_eq!(sel.query.block(k).len(), 25);
    }
    for id in &as_set {
        assert!(pool.is_unlabeled(*id), "{id} was already labeled");
    }

    // the fine-tuned clone must leave the scoring network bit-identical
    save_scoring_checkpoint(&after, &scoring, 33, 0).unwrap();
    assert_eq!(
        std::fs::read(&before).unwrap(),
        std::fs::read(&after).unwrap(),
        "selection mutated the scoring network"
    );

    // determinism under a fixed seed
    let again = pal_select(&pool, &dataset.images, &scoring, &budget, &hp).unwrap();
    assert_eq!(sel.query, again.query);
    assert_eq!(sel.records, again.records);

    // zero diversity weight collapses to a single-block ranking
    let hp_nodiv = Hyperparameters {
        lambda2: 0.0,
        ..hp.clone()
    };
    let nodiv = pal_select(&pool, &dataset.images, &scoring, &budget, &hp_nodiv).unwrap();
    let single = pal_select(
        &pool,
        &dataset.images,
        &scoring,
        &QueryBudget::new(100, 1).unwrap(),
        &hp,
    )
    .unwrap();
    let nodiv_set: BTreeSet<SampleId> = nodiv.query.sample_ids.iter().copied().collect();
    let single_set: BTreeSet<SampleId> = single.query.sample_ids.iter().copied().collect();
    assert_eq!(nodiv_set, single_set, "lambda2 = 0 differs from K = 1");
    pass("criterion 4 (sub-query structure, determinism, clone isolation)");
}

// ------------------------------------------------------------ criterion 5 --

#[test]
fn criterion_05_accuracy_ordering_end_to_end() {
    // 60 epochs: the method's queries concentrate the pool's hardest
    // samples, and the final-round comparison needs enough steps for
    // training to fit them instead of reporting underfitting noise
    let mut main_plan = experiment_plan(
        FIVE_SEEDS.to_vec(),
        vec![StrategyKind::Pal, StrategyKind::Random],
    );
    main_plan.hyperparameters.epochs_main = 60;
    let main = run_active_learning(&main_plan).unwrap();

    let mut ablation_plan = experiment_plan(FIVE_SEEDS.to_vec(), vec![StrategyKind::Pal]);
    ablation_plan.hyperparameters.epochs_main = 60;
    ablation_plan.hyperparameters.lambda1 = 0.0;
    ablation_plan.hyperparameters.lambda2 = 0.0;
    let ablation = run_active_learning(&ablation_plan).unwrap();

    let pal = mean(&final_accuracies(&main, StrategyKind::Pal));
    let random = mean(&final_accuracies(&main, StrategyKind::Random));
    let pure_ssl = mean(&final_accuracies(&ablation, StrategyKind::Pal));

    assert!(
        pal >= random,
        "mean final accuracy: full method {pal:.4} < random {random:.4}"
    );
    assert!(
        pal >= pure_ssl,
        "mean final accuracy: full method {pal:.4} < pure-ssl ablation {pure_ssl:.4}"
    );
    pass(&format!(
        "criterion 5 (end-to-end ordering: full {pal:.4} >= random {random:.4}, >= pure-ssl {pure_ssl:.4})"
    ));
}

// ------------------------------------------------------------ criterion 6 --

#[test]
fn criterion_06_biased_pool_missing_class_rate() {
    let excluded: BTreeSet<ClassLabel> = [2, 3].into_iter().collect();
    let mut plan = experiment_plan(
        FIVE_SEEDS.to_vec(),
        vec![StrategyKind::Pal, StrategyKind::Random],
    );
    plan.excluded_classes = excluded.clone();
    plan.round_count = 1;
    let outputs = run_active_learning(&plan).unwrap();

    // the initial pool holds no excluded-class samples, so their share of
    // the unlabeled pool is their full train-split count over its size
    let dataset = generate_synthetic_dataset(4, 500, 16, 11).unwrap();
    let mut pal_rates = Vec::new();
    let mut random_rates = Vec::new();
    let mut shares = Vec::new();
    for run in &outputs.runs {
        let art = run
            .outcome
            .as_ref()
            .unwrap_or_else(|e| panic!("{}-seed{} failed: {e}", run.strategy.name(), run.seed));
        let split = stratified_split(&dataset, plan.test_fraction, run.seed).unwrap();
        let train = dataset.subset(&split.train);
        let missing_total = train
            .ids()
            .filter(|&id| excluded.contains(&train.true_label(id)))
            .count();
        let unlabeled_total = train.len() - art.initial_labeled.len();
        shares.push(missing_total as f64 / unlabeled_total as f64);

        let rate = missing_class_sampling_rate(&art.log, &excluded)[0];
        match run.strategy {
            StrategyKind::Pal => pal_rates.push(rate),
            StrategyKind::Random => random_rates.push(rate),
            other => panic!("unexpected strategy {other}"),
        }
    }
    let share = mean(&shares);
    let pal_rate = mean(&pal_rates);
    let random_rate = mean(&random_rates);

    assert!(
        pal_rate >= 1.5 * share,
        "first-query missing-class rate {pal_rate:.3} below 1.5x their pool share {share:.3}"
    );
    assert!(
        (random_rate - share).abs() <= 0.5 * share,
        "random rate {random_rate:.3} outside +/-50% of pool share {share:.3}"
    );
    pass(&format!(
        "criterion 6 (biased pool: method rate {pal_rate:.3} >= 1.5 x share {share:.3}, random {random_rate:.3})"
    ));
}

// ------------------------------------------------------------ criterion 7 --

#[test]
fn criterion_07_label_noise_robustness() {
    let strategies = vec![StrategyKind::Pal, StrategyKind::Entropy];
    let clean_plan = experiment_plan(FIVE_SEEDS.to_vec(), strategies.clone());
    let clean = run_active_learning(&clean_plan).unwrap();
    let mut noisy_plan = experiment_plan(FIVE_SEEDS.to_vec(), strategies);
    noisy_plan.noise_rate = 0.2;
    let noisy = run_active_learning(&noisy_plan).unwrap();

    let drop_of = |kind: StrategyKind| {
        mean(&final_accuracies(&clean, kind)) - mean(&final_accuracies(&noisy, kind))
    };
    let pal_drop = drop_of(StrategyKind::Pal);
    let entropy_drop = drop_of(StrategyKind::Entropy);
    assert!(
        pal_drop <= entropy_drop,
        "accuracy drop under 20% label noise: method {pal_drop:.4} > entropy baseline {entropy_drop:.4}"
    );
    pass(&format!(
        "criterion 7 (noise robustness: drop {pal_drop:.4} <= entropy {entropy_drop:.4})"
    ));
}

// ------------------------------------------------------------ criterion 8 --

#[test]
fn criterion_08_score_component_correlation_sign() {
    let dataset = generate_synthetic_dataset(4, 500, 16, 11).unwrap();
    let arch = Architecture {
        input_channels: 1,
        input_side: 16,
        conv_channels: vec![8, 16],
    };
    let template = ScoringNetwork::new(arch, 4, 0).unwrap();
    // lr 0.1 makes scoring training converge reliably within 40 epochs on
    // a 160-sample labeled pool (three minibatches per epoch); at lr 0.01
    // some seeds never leave the initialization plateau in this budget and
    // the correlation would measure initialization noise instead of
    // trained-network behavior
    let hp = Hyperparameters {
        epochs_main: 40,
        scoring_lr: 0.1,
        ..Hyperparameters::default()
    };

    let mut positive = 0;
    let mut observed = Vec::new();
    for seed in FIVE_SEEDS {
        let split = stratified_split(&dataset, 0.2, seed).unwrap();
        let train = dataset.subset(&split.train);
        let oracle = Oracle::clean(&train);
        let pool = init_pools(train.len(), 0.10, seed, &oracle).unwrap();
        let cfg = TrainConfig {
            seed,
            ..TrainConfig::for_scoring(&hp)
        };
        let (scoring, _) = train_scoring(&template, &pool, &train.images, &cfg).unwrap();

        let unlabeled = pool.unlabeled_ids();
        let mut per_rot = Vec::new();
        for rotation in RotationIndex::ALL {
            per_rot.push(
                scoring
                    .predict_rotation_probs_batch(&train.images, &unlabeled, rotation)
                    .unwrap(),
            );
        }
        let s_ssl: Vec<f64> = (0..unlabeled.len())
            .map(|i| {
                let probs: [Pmf; 4] = std::array::from_fn(|r| per_rot[r][i].clone());
                ssl_confusion_score(&probs).unwrap()
            })
            .collect();
        let s_cls: Vec<f64> = scoring
            .predict_class_probs_batch(&train.images, &unlabeled)
            .unwrap()
            .iter()
            .map(|pmf| classification_confusion_score(pmf).unwrap())
            .collect();

        let r = pearson(&s_ssl, &s_cls).unwrap();
        observed.push(r);
        if r > 0.0 {
            positive += 1;
        }
    }
    assert!(
        positive >= 4,
        "pearson(s_ssl, s_cls) positive in only {positive} of 5 seeds: {observed:?}"
    );
    pass(&format!(
        "criterion 8 (correlation sign: positive in {positive}/5 seeds, r = {:?})",
        observed.iter().map(|r| (r * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    ));
}

// ------------------------------------------------------------ criterion 9 --

fn flat_dataset(n: usize, class_count: u32) -> Dataset {
    let images = (0..n)
        .map(|i| Array3::from_elem((1, 1, 1), (i % 7) as f32 / 10.0))
        .collect();
    let labels: Vec<ClassLabel> = (0..n).map(|i| (i as u32) % class_count).collect();
    Dataset::new(ImageSet::from_images(images).unwrap(), labels, class_count).unwrap()
}

#[test]
fn criterion_09_oracle_contracts() {
    let n = 10_000;
    let dataset = flat_dataset(n, 10);
    for (case, &rate) in [0.0, 0.03, 0.1, 0.2, 0.25, 0.5, 0.75, 0.9].iter().enumerate() {
        let seed = 900 + case as u64;
        let oracle = make_oracle(&dataset, rate, seed).unwrap();
        let expected = (rate * n as f64).round() as usize;
        assert_eq!(
            oracle.corrupted_ids().len(),
            expected,
            "rate {rate}: corruption count"
        );
        for id in dataset.ids() {
            let first = oracle.label(id);
            let second = oracle.label(id);
            assert_eq!(first, second, "label changed between queries for {id}");
            assert!(first < 10, "label {first} out of class range");
            if oracle.corrupted_ids().contains(&id) {
                assert_ne!(
                    first,
                    dataset.true_label(id),
                    "corrupted label equals true label for {id}"
                );
            } else {
                assert_eq!(first, dataset.true_label(id), "clean label altered for {id}");
            }
        }
        // rebuilding with the same seed reproduces the corruption exactly
        let again = make_oracle(&dataset, rate, seed).unwrap();
        assert_eq!(again.corrupted_ids(), oracle.corrupted_ids());
        for id in dataset.ids() {
            assert_eq!(again.label(id), oracle.label(id));
        }
    }
    pass("criterion 9 (oracle contracts, exhaustive on 10^4 samples)");
}

// ----------------------------------------------------------- criterion 10 --

struct TrueLabelOracle(Vec<ClassLabel>);

impl LabelOracle for TrueLabelOracle {
    fn label(&self, id: SampleId) -> ClassLabel {
        self.0[id.index()]
    }
}

fn random_instance(
    rng: &mut ChaCha8Rng,
) -> (ImageSet, pal_core::pool::PoolState, QueryBudget) {
    let n = rng.gen_range(4..=50);
    let labeled = rng.gen_range(1..n);
    let query = rng.gen_range(1..=(n - labeled));
    let images: Vec<Array3<f32>> = (0..n)
        .map(|_| Array3::from_shape_fn((1, 8, 8), |_| rng.gen::<f32>()))
        .collect();
    let images = ImageSet::from_images(images).unwrap();
    let oracle = TrueLabelOracle((0..n as u32).map(|i| i % 3).collect());
    // label a random subset, not just a prefix
    let mut ids: Vec<SampleId> = (0..n as u32).map(SampleId).collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.gen_range(0..=i));
    }
    let pool = init_pools_with_ids(n, &ids[..labeled], &oracle).unwrap();
    (images, pool, QueryBudget::new(query, 1).unwrap())
}

#[test]
fn criterion_10_baseline_equivalence_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for trial in 0..100 {
        // --- entropy strategy against a from-scratch re-implementation ---
        let (images, pool, budget) = random_instance(&mut rng);
        let arch = Architecture {
            input_channels: 1,
            input_side: 8,
            conv_channels: vec![4],
        };
        let net = TaskNetwork::new(arch, 3, 7000 + trial).unwrap();
        let ours = entropy_select(&pool, &images, &net, &budget).unwrap();

        let mut candidates: Vec<(SampleId, f64)> = pool
            .unlabeled_ids()
            .into_iter()
            .map(|id| {
                let pmf = net.predict_class_probs(images.image(id)).unwrap();
                (id, shannon_entropy(&pmf))
            })
            .collect();
        let mut brute = Vec::new();
        for _ in 0..budget.query_size {
            let mut best = 0;
            for i in 1..candidates.len() {
                let (bid, bscore) = candidates[best];
                let (cid, cscore) = candidates[i];
                if cscore > bscore || (cscore == bscore && cid < bid) {
                    best = i;
                }
            }
            brute.push(candidates.swap_remove(best).0);
        }
        assert_eq!(ours.sample_ids, brute, "entropy mismatch on trial {trial}");

        // --- greedy k-center against a quadratic re-implementation ---
        let (images, pool, budget) = random_instance(&mut rng);
        let ours = coreset_select(
            &pool,
            &images,
            |img| Ok(img.iter().copied().collect()),
            &budget,
        )
        .unwrap();

        let emb = |id: SampleId| -> Vec<f32> { images.image(id).iter().copied().collect() };
        let d2 = |a: &[f32], b: &[f32]| -> f64 {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| ((x - y) as f64) * ((x - y) as f64))
                .sum()
        };
        let mut centers: Vec<Vec<f32>> =
            pool.labeled_ids().iter().map(|&id| emb(id)).collect();
        let mut remaining: Vec<SampleId> = pool.unlabeled_ids();
        let mut brute = Vec::new();
        for _ in 0..budget.query_size {
            // recompute every distance from scratch each round
            let mut best: Option<(SampleId, f64)> = None;
            for &id in &remaining {
                let p = emb(id);
                let dist = centers
                    .iter()
                    .map(|c| d2(&p, c))
                    .fold(f64::INFINITY, f64::min);
                best = match best {
                    Some((_, bd)) if dist > bd => Some((id, dist)),
                    None => Some((id, dist)),
                    keep => keep,
                };
            }
            let (pick, _) = best.unwrap();
            brute.push(pick);
            centers.push(emb(pick));
            remaining.retain(|&id| id != pick);
        }
        assert_eq!(ours.sample_ids, brute, "k-center mismatch on trial {trial}");
    }
    pass("criterion 10 (baseline strategies match brute force, 100 trials)");
}
