//! Durability statistics over TTM records.
//!
//! Only measured records feed the moments and percentiles; censored and
//! negative-delta records are counted per group and otherwise ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::engine::{Outcome, TtmRecord};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("no values to summarize")]
    EmptyInput,
    #[error("quantile {0} outside [0, 1]")]
    InvalidQuantile(String),
    #[error("unknown {what} {value:?}")]
    Unknown { what: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Seconds,
    Minutes,
    Hours,
    #[default]
    Days,
}

impl TimeUnit {
    pub fn divisor(self) -> f64 {
        match self {
            TimeUnit::Seconds => 1.0,
            TimeUnit::Minutes => 60.0,
            TimeUnit::Hours => 3600.0,
            TimeUnit::Days => 86_400.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::Seconds => "seconds",
            TimeUnit::Minutes => "minutes",
            TimeUnit::Hours => "hours",
            TimeUnit::Days => "days",
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimeUnit {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "seconds" | "s" => Ok(TimeUnit::Seconds),
            "minutes" | "m" => Ok(TimeUnit::Minutes),
            "hours" | "h" => Ok(TimeUnit::Hours),
            "days" | "d" => Ok(TimeUnit::Days),
            _ => Err(StatsError::Unknown {
                what: "unit",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    Repo,
    ByAuthor,
    /// Leading `/`-separated path components; depth 0 is treated as 1.
    ByPathPrefix(usize),
    /// Half-open windows of this many seconds on the introduction time.
    ByIntroWindow(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupKey {
    Repo,
    Author(String),
    PathPrefix(String),
    Window { start: i64, end: i64 },
}

impl GroupKey {
    fn of(record: &TtmRecord, grouping: Grouping) -> GroupKey {
        match grouping {
            Grouping::Repo => GroupKey::Repo,
            Grouping::ByAuthor => GroupKey::Author(record.author_id.clone()),
            Grouping::ByPathPrefix(depth) => GroupKey::PathPrefix(path_prefix(&record.key.path, depth)),
            Grouping::ByIntroWindow(width) => {
                let start = record.intro_ts.div_euclid(width) * width;
                GroupKey::Window {
                    start,
                    end: start + width,
                }
            }
        }
    }
}

pub fn path_prefix(path: &str, depth: usize) -> String {
    path.split('/').take(depth.max(1)).collect::<Vec<_>>().join("/")
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKey::Repo => f.write_str("repo"),
            GroupKey::Author(a) => write!(f, "author:{a}"),
            GroupKey::PathPrefix(p) => write!(f, "path-prefix:{p}"),
            GroupKey::Window { start, end } => write!(f, "window:{start},{end}"),
        }
    }
}

impl FromStr for GroupKey {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || StatsError::Unknown {
            what: "group key",
            value: s.to_string(),
        };
        if s == "repo" {
            return Ok(GroupKey::Repo);
        }
        if let Some(a) = s.strip_prefix("author:") {
            return Ok(GroupKey::Author(a.to_string()));
        }
        if let Some(p) = s.strip_prefix("path-prefix:") {
            return Ok(GroupKey::PathPrefix(p.to_string()));
        }
        let (start, end) = s
            .strip_prefix("window:")
            .and_then(|w| w.split_once(','))
            .ok_or_else(bad)?;
        Ok(GroupKey::Window {
            start: start.parse().map_err(|_| bad())?,
            end: end.parse().map_err(|_| bad())?,
        })
    }
}

impl Serialize for GroupKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Statistics for one group. Magnitudes are in `unit` and absent when the
/// group has no measured records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurabilitySummary {
    pub group_key: GroupKey,
    pub unit: TimeUnit,
    pub n_measured: usize,
    pub mttm: Option<f64>,
    pub median: Option<f64>,
    pub stddev: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub p25: Option<f64>,
    pub p75: Option<f64>,
    pub p90: Option<f64>,
    pub n_censored: usize,
    pub n_negative: usize,
}

impl DurabilitySummary {
    pub fn total(&self) -> usize {
        self.n_measured + self.n_censored + self.n_negative
    }
}

/// Linear interpolation between closest ranks at index `q * (n - 1)`.
pub fn percentile(sorted: &[f64], q: f64) -> Result<f64, StatsError> {
    if sorted.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(StatsError::InvalidQuantile(q.to_string()));
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

#[derive(Default)]
struct Bucket {
    measured: Vec<i64>,
    censored: usize,
    negative: usize,
}

fn summarize_bucket(key: GroupKey, mut b: Bucket, unit: TimeUnit) -> DurabilitySummary {
    b.measured.sort_unstable();
    let n = b.measured.len();
    let div = unit.divisor();
    let mut s = DurabilitySummary {
        group_key: key,
        unit,
        n_measured: n,
        mttm: None,
        median: None,
        stddev: None,
        min: None,
        max: None,
        p25: None,
        p75: None,
        p90: None,
        n_censored: b.censored,
        n_negative: b.negative,
    };
    if n == 0 {
        return s;
    }
    // Exact integer sum; the only rounding is the final division.
    let sum: i128 = b.measured.iter().map(|&v| v as i128).sum();
    let mean = sum as f64 / n as f64;
    let stddev = if n == 1 {
        0.0
    } else {
        let ss: f64 = b.measured.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    };
    let sorted: Vec<f64> = b.measured.iter().map(|&v| v as f64).collect();
    let q = |p| percentile(&sorted, p).expect("non-empty") / div;
    s.mttm = Some(mean / div);
    s.stddev = Some(stddev / div);
    s.median = Some(q(0.5));
    s.min = Some(q(0.0));
    s.max = Some(q(1.0));
    s.p25 = Some(q(0.25));
    s.p75 = Some(q(0.75));
    s.p90 = Some(q(0.9));
    s
}

/// Summaries per group, sorted by group key. Empty input gives an empty list.
pub fn summarize(records: &[TtmRecord], grouping: Grouping, unit: TimeUnit) -> Vec<DurabilitySummary> {
    let grouping = match grouping {
        Grouping::ByIntroWindow(w) if w <= 0 => Grouping::ByIntroWindow(1),
        g => g,
    };
    let mut buckets: BTreeMap<GroupKey, Bucket> = BTreeMap::new();
    for r in records {
        let b = buckets.entry(GroupKey::of(r, grouping)).or_default();
        match r.outcome {
            Outcome::Measured { ttm_seconds, .. } => b.measured.push(ttm_seconds),
            Outcome::NegativeDelta { .. } => b.negative += 1,
            Outcome::Censored => b.censored += 1,
        }
    }
    buckets
        .into_iter()
        .map(|(k, b)| summarize_bucket(k, b, unit))
        .collect()
}

/// MTTM per introduction-time window, in window order. Empty windows are
/// omitted.
pub fn timeseries_mttm(
    records: &[TtmRecord],
    window_seconds: i64,
    unit: TimeUnit,
) -> Vec<(i64, DurabilitySummary)> {
    summarize(records, Grouping::ByIntroWindow(window_seconds), unit)
        .into_iter()
        .map(|s| match s.group_key {
            GroupKey::Window { start, .. } => (start, s),
            _ => unreachable!("window grouping yields window keys"),
        })
        .collect()
}
