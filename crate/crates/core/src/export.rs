//! CSV and JSON exports of per-hunk records and summaries, with readers that
//! reproduce the in-memory values exactly.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Outcome, RunMetadata, TtmRecord};
use crate::hunk_index::HunkKey;
use crate::repo_source::CommitId;
use crate::stats::DurabilitySummary;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid row: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(ExportError::Invalid(format!("unknown format {s:?}"))),
        }
    }
}

pub const HUNKS_STEM: &str = "hunks";
pub const SUMMARY_STEM: &str = "summary";
pub const RUN_FILE: &str = "run.json";

/// Flat per-hunk row; seconds are raw and lossless.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HunkRow {
    pub intro_sha: String,
    pub path: String,
    pub new_start: u32,
    pub new_end: u32,
    pub author: String,
    pub intro_ts: i64,
    pub outcome: String,
    pub ttm_seconds: Option<i64>,
    pub first_mod_sha: Option<String>,
}

impl From<&TtmRecord> for HunkRow {
    fn from(r: &TtmRecord) -> Self {
        Self {
            intro_sha: r.key.intro_sha.to_string(),
            path: r.key.path.clone(),
            new_start: r.key.new_start,
            new_end: r.key.new_end,
            author: r.author_id.clone(),
            intro_ts: r.intro_ts,
            outcome: r.outcome.label().to_string(),
            ttm_seconds: r.outcome.ttm_seconds(),
            first_mod_sha: r.outcome.first_mod_sha().map(ToString::to_string),
        }
    }
}

impl TryFrom<HunkRow> for TtmRecord {
    type Error = ExportError;

    fn try_from(row: HunkRow) -> Result<Self, Self::Error> {
        let bad = |m: String| ExportError::Invalid(m);
        let sha = |s: &str| CommitId::new(s).map_err(|e| bad(e.to_string()));
        let modified = || -> Result<(i64, CommitId), ExportError> {
            let ttm = row
                .ttm_seconds
                .ok_or_else(|| bad(format!("{} row without ttm_seconds", row.outcome)))?;
            let first = row
                .first_mod_sha
                .as_deref()
                .ok_or_else(|| bad(format!("{} row without first_mod_sha", row.outcome)))?;
            Ok((ttm, sha(first)?))
        };
        let outcome = match row.outcome.as_str() {
            "measured" => {
                let (ttm_seconds, first_mod_sha) = modified()?;
                Outcome::Measured {
                    ttm_seconds,
                    first_mod_sha,
                }
            }
            "negative_delta" => {
                let (ttm_seconds, first_mod_sha) = modified()?;
                Outcome::NegativeDelta {
                    ttm_seconds,
                    first_mod_sha,
                }
            }
            "censored" => Outcome::Censored,
            other => return Err(bad(format!("unknown outcome {other:?}"))),
        };
        if row.new_start < 1 || row.new_end < row.new_start {
            return Err(bad(format!("bad range {}-{}", row.new_start, row.new_end)));
        }
        Ok(TtmRecord {
            key: HunkKey::new(sha(&row.intro_sha)?, row.path, row.new_start, row.new_end),
            author_id: row.author,
            intro_ts: row.intro_ts,
            outcome,
        })
    }
}

fn write_rows<T: Serialize>(w: impl Write, rows: impl IntoIterator<Item = T>, format: Format) -> Result<(), ExportError> {
    match format {
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            for row in rows {
                out.serialize(row)?;
            }
            out.flush()?;
        }
        Format::Json => {
            let rows: Vec<T> = rows.into_iter().collect();
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, &rows)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
    }
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(r: impl Read, format: Format) -> Result<Vec<T>, ExportError> {
    match format {
        Format::Csv => csv::Reader::from_reader(r)
            .deserialize()
            .map(|row| row.map_err(ExportError::from))
            .collect(),
        Format::Json => Ok(serde_json::from_reader(r)?),
    }
}

/// CSV always writes a header, even with no rows.
fn write_csv_header_if_empty(w: &mut impl Write, header: &str, empty: bool, format: Format) -> Result<(), ExportError> {
    if empty && format == Format::Csv {
        writeln!(w, "{header}")?;
    }
    Ok(())
}

const HUNK_HEADER: &str = "intro_sha,path,new_start,new_end,author,intro_ts,outcome,ttm_seconds,first_mod_sha";
const SUMMARY_HEADER: &str =
    "group_key,unit,n_measured,mttm,median,stddev,min,max,p25,p75,p90,n_censored,n_negative";

pub fn write_hunks_to(mut w: impl Write, records: &[TtmRecord], format: Format) -> Result<(), ExportError> {
    write_csv_header_if_empty(&mut w, HUNK_HEADER, records.is_empty(), format)?;
    write_rows(w, records.iter().map(HunkRow::from), format)
}

pub fn read_hunks_from(r: impl Read, format: Format) -> Result<Vec<TtmRecord>, ExportError> {
    read_rows::<HunkRow>(r, format)?
        .into_iter()
        .map(TtmRecord::try_from)
        .collect()
}

pub fn write_summaries_to(
    mut w: impl Write,
    summaries: &[DurabilitySummary],
    format: Format,
) -> Result<(), ExportError> {
    write_csv_header_if_empty(&mut w, SUMMARY_HEADER, summaries.is_empty(), format)?;
    write_rows(w, summaries, format)
}

pub fn read_summaries_from(r: impl Read, format: Format) -> Result<Vec<DurabilitySummary>, ExportError> {
    read_rows(r, format)
}

pub fn write_hunks(path: &Path, records: &[TtmRecord], format: Format) -> Result<(), ExportError> {
    write_hunks_to(BufWriter::new(fs::File::create(path)?), records, format)
}

pub fn read_hunks(path: &Path, format: Format) -> Result<Vec<TtmRecord>, ExportError> {
    read_hunks_from(fs::File::open(path)?, format)
}

pub fn write_summaries(path: &Path, summaries: &[DurabilitySummary], format: Format) -> Result<(), ExportError> {
    write_summaries_to(BufWriter::new(fs::File::create(path)?), summaries, format)
}

pub fn read_summaries(path: &Path, format: Format) -> Result<Vec<DurabilitySummary>, ExportError> {
    read_summaries_from(fs::File::open(path)?, format)
}

pub fn write_run_metadata(path: &Path, meta: &RunMetadata) -> Result<(), ExportError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, meta)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_run_metadata(path: &Path) -> Result<RunMetadata, ExportError> {
    Ok(serde_json::from_reader(fs::File::open(path)?)?)
}
