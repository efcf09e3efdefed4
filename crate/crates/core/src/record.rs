//! Persistent run artifacts: per-sample score records (CSV), per-round run
//! logs (JSON lines), query manifests (JSON), and summary rows (CSV).

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::SampleId;
use crate::error::{PalError, Result};

/// Per-sample acquisition scores at one evaluation point.
///
/// `s_div` is absent for evaluations made before any clone fine-tuning
/// (the first sub-query); `s_combined` is always the exact weighted sum of
/// the components that were present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub sample: SampleId,
    pub s_ssl: f64,
    pub s_cls: f64,
    pub s_div: Option<f64>,
    pub s_combined: f64,
    /// Bounded entropy-variant score; computed on demand for diagnostics,
    /// not persisted in the CSV dump.
    pub s_entropy_variant: Option<f64>,
    /// 1-based query round.
    pub round: u32,
    /// 1-based sub-query within the round.
    pub subquery: u32,
}

const SCORE_HEADER: [&str; 7] = [
    "sample_id",
    "s_ssl",
    "s_cls",
    "s_div",
    "s_combined",
    "round",
    "subquery",
];

/// Write score records as CSV with the fixed column set
/// `sample_id, s_ssl, s_cls, s_div, s_combined, round, subquery`.
/// Floats use the shortest round-trip representation, so reading the file
/// back reproduces them bit-exactly.
pub fn write_scores_csv(path: &Path, records: &[ScoreRecord]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    w.write_record(SCORE_HEADER).map_err(csv_io)?;
    for r in records {
        w.write_record(&[
            r.sample.0.to_string(),
            format!("{}", r.s_ssl),
            format!("{}", r.s_cls),
            r.s_div.map(|v| format!("{v}")).unwrap_or_default(),
            format!("{}", r.s_combined),
            r.round.to_string(),
            r.subquery.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a score CSV written by [`write_scores_csv`]. Malformed rows are
/// reported with their 1-based data-row number.
pub fn read_scores_csv(path: &Path) -> Result<Vec<ScoreRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_io)?;
    {
        let headers = reader.headers().map_err(csv_io)?;
        let got: Vec<&str> = headers.iter().collect();
        if got != SCORE_HEADER {
            return Err(PalError::CsvRow {
                row: 0,
                message: format!("unexpected header {got:?}"),
            });
        }
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let rownum = i + 1;
        let row = row.map_err(|e| PalError::CsvRow {
            row: rownum,
            message: e.to_string(),
        })?;
        out.push(parse_score_row(&row).map_err(|message| PalError::CsvRow {
            row: rownum,
            message,
        })?);
    }
    Ok(out)
}

fn parse_score_row(row: &csv::StringRecord) -> std::result::Result<ScoreRecord, String> {
    if row.len() != SCORE_HEADER.len() {
        return Err(format!(
            "expected {} fields, got {}",
            SCORE_HEADER.len(),
            row.len()
        ));
    }
    let field = |i: usize| row.get(i).unwrap_or_default();
    let f64_field = |i: usize| -> std::result::Result<f64, String> {
        field(i)
            .parse::<f64>()
            .map_err(|e| format!("column {}: {e}", SCORE_HEADER[i]))
    };
    let s_div = match field(3) {
        "" => None,
        s => Some(
            s.parse::<f64>()
                .map_err(|e| format!("column s_div: {e}"))?,
        ),
    };
    Ok(ScoreRecord {
        sample: SampleId(
            field(0)
                .parse::<u32>()
                .map_err(|e| format!("column sample_id: {e}"))?,
        ),
        s_ssl: f64_field(1)?,
        s_cls: f64_field(2)?,
        s_div,
        s_combined: f64_field(4)?,
        s_entropy_variant: None,
        round: field(5)
            .parse::<u32>()
            .map_err(|e| format!("column round: {e}"))?,
        subquery: field(6)
            .parse::<u32>()
            .map_err(|e| format!("column subquery: {e}"))?,
    })
}

fn csv_io(e: csv::Error) -> PalError {
    PalError::Run(format!("csv: {e}"))
}

/// One completed query round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based query round.
    pub round_index: u32,
    /// Fraction of the full pool labeled after this round's commit.
    pub labeled_fraction: f64,
    /// Held-out accuracy of the task network retrained after the commit.
    pub task_accuracy: f64,
    /// The queried ids, in selection order.
    pub query_sample_ids: Vec<SampleId>,
    /// Query composition by true class (a measurement for analysis;
    /// strategies never see these labels).
    pub query_class_counts: Vec<u32>,
    pub wall_time_secs: f64,
}

/// Full log of one (strategy, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub strategy: String,
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
}

impl RunLog {
    /// Check the structural invariants: rounds numbered 1..=R and labeled
    /// fraction strictly increasing.
    pub fn validate(&self) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for (i, r) in self.rounds.iter().enumerate() {
            if r.round_index as usize != i + 1 {
                return Err(PalError::Run(format!(
                    "round_index {} at position {i}",
                    r.round_index
                )));
            }
            if r.labeled_fraction <= prev {
                return Err(PalError::Run(format!(
                    "labeled_fraction not strictly increasing at round {}",
                    r.round_index
                )));
            }
            prev = r.labeled_fraction;
        }
        Ok(())
    }
}

/// Persist a run log as JSON lines, one round per line.
pub fn write_runlog_jsonl(path: &Path, log: &RunLog) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    for round in &log.rounds {
        serde_json::to_writer(&mut f, round)?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a JSON-lines run log; `strategy` and `seed` come from the caller
/// (they are encoded in the file's path, not its lines).
pub fn read_runlog_jsonl(path: &Path, strategy: &str, seed: u64) -> Result<RunLog> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut rounds = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rounds.push(serde_json::from_str(&line)?);
    }
    let log = RunLog {
        strategy: strategy.to_string(),
        seed,
        rounds,
    };
    log.validate()?;
    Ok(log)
}

/// The composition of a single round's query, persisted as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryManifest {
    pub round: u32,
    pub strategy: String,
    pub ids: Vec<SampleId>,
    /// End index (exclusive) of each sub-query block within `ids`.
    pub subquery_boundaries: Vec<usize>,
    pub seed: u64,
}

pub fn write_query_manifest(path: &Path, manifest: &QueryManifest) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, manifest)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_query_manifest(path: &Path) -> Result<QueryManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// One row of the cross-run summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: String,
    pub seed: u64,
    pub round: u32,
    pub labeled_fraction: f64,
    pub accuracy: f64,
}

/// Write `summary.csv`: one row per (strategy, seed, round), in the given
/// order. Deterministic bytes for deterministic inputs.
pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    w.write_record(["strategy", "seed", "round", "labeled_fraction", "accuracy"])
        .map_err(csv_io)?;
    for r in rows {
        w.write_record(&[
            r.strategy.clone(),
            r.seed.to_string(),
            r.round.to_string(),
            format!("{}", r.labeled_fraction),
            format!("{}", r.accuracy),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_records() -> Vec<ScoreRecord> {
        vec![
            ScoreRecord {
                sample: SampleId(3),
                s_ssl: -1.25,
                s_cls: -0.510825623765990,
                s_div: None,
                s_combined: -1.760825623765990,
                s_entropy_variant: None,
                round: 1,
                subquery: 1,
            },
            ScoreRecord {
                sample: SampleId(9),
                s_ssl: -0.1,
                s_cls: -2.0,
                s_div: Some(-3.9999999999),
                s_combined: -6.0999999999,
                s_entropy_variant: None,
                round: 1,
                subquery: 2,
            },
        ]
    }

    #[test]
    fn score_csv_roundtrip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        let records = sample_records();
        write_scores_csv(&path, &records).unwrap();
        let back = read_scores_csv(&path).unwrap();
        assert_eq!(records, back);
        // header is pinned
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("sample_id,s_ssl,s_cls,s_div,s_combined,round,subquery\n"));
    }

    #[test]
    fn score_csv_reports_bad_row_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        std::fs::write(
            &path,
            "sample_id,s_ssl,s_cls,s_div,s_combined,round,subquery\n\
             1,-1.0,-0.5,,-1.5,1,1\n\
             2,oops,-0.5,,-1.5,1,1\n",
        )
        .unwrap();
        match read_scores_csv(&path) {
            Err(PalError::CsvRow { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected CsvRow error, got {other:?}"),
        }
    }

    #[test]
    fn score_csv_rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_scores_csv(&path).is_err());
    }

    fn sample_log() -> RunLog {
        RunLog {
            strategy: "pal".into(),
            seed: 3,
            rounds: vec![
                RoundRecord {
                    round_index: 1,
                    labeled_fraction: 0.15,
                    task_accuracy: 0.5,
                    query_sample_ids: vec![SampleId(4), SampleId(2)],
                    query_class_counts: vec![1, 1, 0],
                    wall_time_secs: 0.25,
                },
                RoundRecord {
                    round_index: 2,
                    labeled_fraction: 0.20,
                    task_accuracy: 0.6,
                    query_sample_ids: vec![SampleId(9), SampleId(7)],
                    query_class_counts: vec![0, 1, 1],
                    wall_time_secs: 0.21,
                },
            ],
        }
    }

    #[test]
    fn runlog_jsonl_roundtrip_one_round_per_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runlog.jsonl");
        let log = sample_log();
        write_runlog_jsonl(&path, &log).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        let back = read_runlog_jsonl(&path, "pal", 3).unwrap();
        assert_eq!(log, back);
    }

    #[test]
    fn runlog_validates_monotonic_fraction() {
        let mut log = sample_log();
        log.rounds[1].labeled_fraction = 0.10;
        assert!(log.validate().is_err());
        let mut log = sample_log();
        log.rounds[1].round_index = 5;
        assert!(log.validate().is_err());
        assert!(sample_log().validate().is_ok());
    }

    #[test]
    fn query_manifest_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("query.json");
        let m = QueryManifest {
            round: 2,
            strategy: "pal".into(),
            ids: vec![SampleId(5), SampleId(1), SampleId(8), SampleId(0)],
            subquery_boundaries: vec![2, 4],
            seed: 7,
        };
        write_query_manifest(&path, &m).unwrap();
        assert_eq!(read_query_manifest(&path).unwrap(), m);
    }

    #[test]
    fn summary_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        let rows = vec![
            SummaryRow {
                strategy: "random".into(),
                seed: 0,
                round: 1,
                labeled_fraction: 0.15,
                accuracy: 0.55,
            },
            SummaryRow {
                strategy: "random".into(),
                seed: 0,
                round: 2,
                labeled_fraction: 0.2,
                accuracy: 0.625,
            },
        ];
        write_summary_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "strategy,seed,round,labeled_fraction,accuracy");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "random,0,1,0.15,0.55");
    }
}
