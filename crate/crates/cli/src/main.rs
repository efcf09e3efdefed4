//! `pal` — run active-learning experiments from a plan file, generate
//! synthetic datasets, and emit diagnostics reports from score dumps.
//!
//! Exit codes: 0 success, 1 invalid configuration or plan, 2 runtime
//! failure (including partially failed experiment runs).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use pal_core::dataset::save_dataset;
use pal_core::diagnostics::{
    alpha_probe, component_correlations, overshadow_probe, DiagnosticsReport, OvershadowSection,
    RoundCorrelation, PROBE_S_SSL,
};
use pal_core::record::{read_scores_csv, write_query_manifest, write_runlog_jsonl, write_scores_csv, write_summary_csv};
use pal_core::simulate::{generate_synthetic_dataset, run_active_learning_jobs, ExperimentPlan};
use pal_core::{PalError, Result};

/// Environment variable giving the default parent directory for outputs
/// when `--out` is not passed.
const OUT_ROOT_ENV: &str = "PAL_OUT_ROOT";

const ARTIFACT_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "pal",
    version,
    about = "Pretext-scored active-learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment plan and persist all artifacts.
    Run(RunArgs),
    /// Build a diagnostics report from a finished run directory.
    Diagnose(DiagnoseArgs),
    /// Generate a synthetic dataset in the manifest format.
    GenData(GenDataArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment plan (JSON).
    #[arg(long)]
    plan: PathBuf,
    /// Output directory; defaults to $PAL_OUT_ROOT/run.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the plan's label-noise rate.
    #[arg(long)]
    noise_rate: Option<f64>,
    /// Override the class-uncertainty weight.
    #[arg(long)]
    lambda1: Option<f64>,
    /// Override the diversity weight.
    #[arg(long)]
    lambda2: Option<f64>,
    /// Override the sub-query count.
    #[arg(long)]
    subqueries: Option<usize>,
    /// Override the per-sub-query fine-tuning epochs.
    #[arg(long)]
    finetune_epochs: Option<usize>,
    /// Run up to this many (strategy, seed) combinations in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// A directory previously written by `pal run`.
    #[arg(long)]
    run: PathBuf,
    /// Report path; defaults to <run>/diagnostics.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    classes: u32,
    #[arg(long)]
    per_class: usize,
    /// Square image side in pixels (at least 8).
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; defaults to $PAL_OUT_ROOT/dataset.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Everything `pal run` writes besides the artifacts themselves: where
/// they are, what produced them, and how each run ended.
#[derive(serde::Serialize, serde::Deserialize)]
struct RunManifest {
    artifact_version: u32,
    /// SHA-256 of the effective plan's canonical JSON.
    config_hash: String,
    created_unix: u64,
    strategies: Vec<String>,
    seeds: Vec<u64>,
    class_count: u32,
    train_len: usize,
    test_len: usize,
    query_size: usize,
    subquery_count: usize,
    summary: String,
    runs: Vec<ManifestRun>,
    /// The plan after command-line overrides.
    plan: ExperimentPlan,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ManifestRun {
    strategy: String,
    seed: u64,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_accuracy: Option<f64>,
    runlog: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    scores: Option<String>,
    queries: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::GenData(args) => cmd_gen_data(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 for configuration problems, 2 for failures during execution or while
/// reading artifacts.
fn exit_code(e: &PalError) -> u8 {
    match e {
        PalError::InvalidConfig(_) | PalError::InvalidPmf(_) | PalError::Dataset(_) => 1,
        _ => 2,
    }
}

fn resolve_out(explicit: Option<PathBuf>, default_leaf: &str) -> Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p);
    }
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) => Ok(PathBuf::from(root).join(default_leaf)),
        None => Err(PalError::InvalidConfig(format!(
            "no --out given and {OUT_ROOT_ENV} is not set"
        ))),
    }
}

fn apply_overrides(plan: &mut ExperimentPlan, args: &RunArgs) {
    if let Some(v) = args.noise_rate {
        plan.noise_rate = v;
    }
    if let Some(v) = args.lambda1 {
        plan.hyperparameters.lambda1 = v;
    }
    if let Some(v) = args.lambda2 {
        plan.hyperparameters.lambda2 = v;
    }
    if let Some(v) = args.subqueries {
        plan.subquery_count = v;
    }
    if let Some(v) = args.finetune_epochs {
        plan.hyperparameters.epochs_finetune = v;
    }
}

fn config_hash(plan: &ExperimentPlan) -> Result<String> {
    let canonical = serde_json::to_string(plan)?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut plan = ExperimentPlan::load(&args.plan)?;
    apply_overrides(&mut plan, &args);
    plan.validate()?;
    let out_dir = resolve_out(args.out, "run")?;

    // execute everything before touching the filesystem, so invalid plans
    // leave no partial outputs behind
    let outputs = run_active_learning_jobs(&plan, args.jobs)?;

    std::fs::create_dir_all(out_dir.join("runlogs"))?;
    std::fs::create_dir_all(out_dir.join("queries"))?;
    std::fs::create_dir_all(out_dir.join("scores"))?;

    let mut manifest_runs = Vec::with_capacity(outputs.runs.len());
    let mut failures = Vec::new();
    for run in &outputs.runs {
        let stem = format!("{}-seed{}", run.strategy.name(), run.seed);
        let runlog_rel = format!("runlogs/{stem}.jsonl");
        match &run.outcome {
            Ok(art) => {
                write_runlog_jsonl(&out_dir.join(&runlog_rel), &art.log)?;
                let mut query_paths = Vec::new();
                for q in &art.queries {
                    let rel = format!("queries/{stem}-round{}.json", q.round);
                    write_query_manifest(&out_dir.join(&rel), q)?;
                    query_paths.push(rel);
                }
                let scores_rel = if art.score_records.is_empty() {
                    None
                } else {
                    let rel = format!("scores/{stem}.csv");
                    write_scores_csv(&out_dir.join(&rel), &art.score_records)?;
                    Some(rel)
                };
                manifest_runs.push(ManifestRun {
                    strategy: run.strategy.name().to_string(),
                    seed: run.seed,
                    status: "ok".into(),
                    error: None,
                    initial_accuracy: Some(art.initial_accuracy),
                    runlog: runlog_rel,
                    scores: scores_rel,
                    queries: query_paths,
                });
            }
            Err(message) => {
                failures.push(format!("{stem}: {message}"));
                manifest_runs.push(ManifestRun {
                    strategy: run.strategy.name().to_string(),
                    seed: run.seed,
                    status: "failed".into(),
                    error: Some(message.clone()),
                    initial_accuracy: None,
                    runlog: runlog_rel,
                    scores: None,
                    queries: Vec::new(),
                });
            }
        }
    }

    write_summary_csv(&out_dir.join("summary.csv"), &outputs.summary_rows())?;
    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION,
        config_hash: config_hash(&plan)?,
        created_unix: unix_now(),
        strategies: plan.strategies.iter().map(|s| s.name().to_string()).collect(),
        seeds: plan.seeds.clone(),
        class_count: outputs.class_count,
        train_len: outputs.train_len,
        test_len: outputs.test_len,
        query_size: outputs.budget.query_size,
        subquery_count: outputs.budget.subquery_count,
        summary: "summary.csv".into(),
        runs: manifest_runs,
        plan,
    };
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_vec_pretty(&manifest)?,
    )?;

    println!(
        "wrote {} run(s) to {}",
        outputs.runs.len(),
        out_dir.display()
    );
    if failures.is_empty() {
        Ok(())
    } else {
        Err(PalError::Run(format!(
            "{} of {} runs failed: {}",
            failures.len(),
            outputs.runs.len(),
            failures.join("; ")
        )))
    }
}

fn read_manifest(run_dir: &Path) -> Result<RunManifest> {
    let path = run_dir.join("manifest.json");
    let bytes = std::fs::read(&path)
        .map_err(|e| PalError::Run(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| PalError::Run(format!("bad manifest {}: {e}", path.display())))
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<()> {
    let manifest = read_manifest(&args.run)?;
    let out_path = args
        .out
        .unwrap_or_else(|| args.run.join("diagnostics.json"));

    // collect score dumps from every successful pretext run; a pretext run
    // without its dump is an error, a plan without the strategy is not
    let mut by_round: BTreeMap<u32, Vec<pal_core::record::ScoreRecord>> = BTreeMap::new();
    let mut saw_pal = false;
    for run in manifest.runs.iter().filter(|r| r.strategy == "pal") {
        if run.status != "ok" {
            continue;
        }
        saw_pal = true;
        let rel = run.scores.as_ref().ok_or_else(|| {
            PalError::Run(format!(
                "run pal-seed{} has no score dump recorded",
                run.seed
            ))
        })?;
        let path = args.run.join(rel);
        if !path.exists() {
            return Err(PalError::Run(format!(
                "missing score dump {}",
                path.display()
            )));
        }
        for record in read_scores_csv(&path)? {
            // the first sub-query scores the whole unlabeled pool; later
            // sub-queries re-score shrinking remainders and would double
            // count samples
            if record.subquery == 1 {
                by_round.entry(record.round).or_default().push(record);
            }
        }
    }

    let correlations_per_round = if saw_pal {
        let mut rounds = Vec::new();
        for (round, records) in &by_round {
            rounds.push(RoundCorrelation {
                round: *round,
                report: component_correlations(records)?,
            });
        }
        Some(rounds)
    } else {
        None
    };

    let lambda1 = manifest.plan.hyperparameters.lambda1;
    let report = DiagnosticsReport {
        correlations_per_round,
        overshadow: OvershadowSection {
            lambda1,
            s_ssl: PROBE_S_SSL,
            rows: overshadow_probe(lambda1, 1..=12)?,
        },
        alpha_probe: alpha_probe(200, 2000, 0)?,
    };
    std::fs::write(&out_path, serde_json::to_vec_pretty(&report)?)?;
    println!("wrote {}", out_path.display());
    Ok(())
}

fn cmd_gen_data(args: GenDataArgs) -> Result<()> {
    let out_dir = resolve_out(args.out, "dataset")?;
    let dataset = generate_synthetic_dataset(args.classes, args.per_class, args.size, args.seed)?;
    std::fs::create_dir_all(&out_dir)?;
    save_dataset(&dataset, &out_dir)?;
    println!(
        "wrote {} samples ({} classes, {}x{}) to {}",
        dataset.len(),
        args.classes,
        args.size,
        args.size,
        out_dir.display()
    );
    Ok(())
}
