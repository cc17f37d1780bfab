//! Threshold check on MTTM for CI use.

use std::str::FromStr;

use thiserror::Error;

use crate::engine::TtmRecord;
use crate::stats::{summarize, GroupKey, Grouping, TimeUnit};

#[derive(Debug, Error, PartialEq)]
pub enum GateError {
    #[error("minimum MTTM must be positive, got {0}")]
    NonPositiveMinimum(f64),
    #[error("minimum sample must be at least 1")]
    ZeroMinSample,
    #[error("cannot parse duration {0:?}")]
    BadDuration(String),
    #[error("unknown scope {0:?} (expected repo, author or path-prefix[:depth])")]
    BadScope(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GateScope {
    #[default]
    Repo,
    Author,
    PathPrefix(usize),
}

impl GateScope {
    pub fn grouping(self) -> Grouping {
        match self {
            GateScope::Repo => Grouping::Repo,
            GateScope::Author => Grouping::ByAuthor,
            GateScope::PathPrefix(d) => Grouping::ByPathPrefix(d),
        }
    }
}

impl FromStr for GateScope {
    type Err = GateError;

    /// `repo`, `author`, `path-prefix` (depth 1) or `path-prefix:N`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "repo" => Ok(GateScope::Repo),
            "author" => Ok(GateScope::Author),
            "path-prefix" => Ok(GateScope::PathPrefix(1)),
            _ => s
                .strip_prefix("path-prefix:")
                .and_then(|d| d.parse().ok())
                .filter(|&d| d >= 1)
                .map(GateScope::PathPrefix)
                .ok_or_else(|| GateError::BadScope(s.to_string())),
        }
    }
}

/// Parse `90`, `1.5h`, `30d` and the like into seconds. A bare number is
/// read in `default_unit`.
pub fn parse_duration(raw: &str, default_unit: TimeUnit) -> Result<f64, GateError> {
    let raw = raw.trim();
    let bad = || GateError::BadDuration(raw.to_string());
    let (number, unit) = match raw.char_indices().last() {
        Some((i, c)) if c.is_ascii_alphabetic() => {
            let unit: TimeUnit = raw[i..].parse().map_err(|_| bad())?;
            (&raw[..i], unit)
        }
        _ => (raw, default_unit),
    };
    let value: f64 = number.trim().parse().map_err(|_| bad())?;
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value * unit.divisor())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateConfig {
    pub min_mttm_seconds: f64,
    pub scope: GateScope,
    pub min_sample: usize,
}

pub const DEFAULT_MIN_SAMPLE: usize = 30;

impl GateConfig {
    pub fn new(min_mttm_seconds: f64, scope: GateScope, min_sample: usize) -> Result<Self, GateError> {
        if min_mttm_seconds.is_nan() || min_mttm_seconds <= 0.0 {
            return Err(GateError::NonPositiveMinimum(min_mttm_seconds));
        }
        if min_sample < 1 {
            return Err(GateError::ZeroMinSample);
        }
        Ok(Self {
            min_mttm_seconds,
            scope,
            min_sample,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupVerdict {
    pub key: GroupKey,
    pub n_measured: usize,
    pub mttm_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GateReport {
    pub passing: Vec<GroupVerdict>,
    pub violations: Vec<GroupVerdict>,
    /// Groups skipped for having fewer measured hunks than the minimum.
    pub insufficient: Vec<GroupVerdict>,
}

impl GateReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn evaluate(records: &[TtmRecord], config: &GateConfig) -> GateReport {
    let mut report = GateReport::default();
    for s in summarize(records, config.scope.grouping(), TimeUnit::Seconds) {
        let verdict = GroupVerdict {
            key: s.group_key,
            n_measured: s.n_measured,
            mttm_seconds: s.mttm,
        };
        if s.n_measured < config.min_sample {
            report.insufficient.push(verdict);
        } else if s.mttm.is_some_and(|m| m >= config.min_mttm_seconds) {
            report.passing.push(verdict);
        } else {
            report.violations.push(verdict);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Outcome;
    use crate::hunk_index::HunkKey;
    use crate::repo_source::CommitId;

    fn recs(ttms: &[i64]) -> Vec<TtmRecord> {
        ttms.iter()
            .enumerate()
            .map(|(i, &t)| TtmRecord {
                key: HunkKey::new(CommitId::new(format!("{:040x}", i + 1)).unwrap(), "f", 1, 1),
                author_id: if i % 2 == 0 { "a".into() } else { "b".into() },
                intro_ts: 0,
                outcome: Outcome::Measured {
                    ttm_seconds: t,
                    first_mod_sha: CommitId::new("f".repeat(40)).unwrap(),
                },
            })
            .collect()
    }

    #[test]
    fn pass_fail_and_skip() {
        let data = recs(&[100; 30]);
        let cfg = |min| GateConfig::new(min, GateScope::Repo, 30).unwrap();
        assert!(evaluate(&data, &cfg(50.0)).passed());
        let fail = evaluate(&data, &cfg(200.0));
        assert!(!fail.passed());
        assert_eq!(fail.violations[0].key, GroupKey::Repo);

        let single = evaluate(&recs(&[100]), &cfg(200.0));
        assert!(single.passed());
        assert_eq!(single.insufficient.len(), 1);
    }

    #[test]
    fn boundary_is_inclusive() {
        let cfg = GateConfig::new(100.0, GateScope::Repo, 1).unwrap();
        assert!(evaluate(&recs(&[100]), &cfg).passed());
    }

    #[test]
    fn per_author_scope() {
        // a: 10, 10; b: 1000, 1000
        let data = recs(&[10, 1000, 10, 1000]);
        let cfg = GateConfig::new(500.0, GateScope::Author, 2).unwrap();
        let r = evaluate(&data, &cfg);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].key, GroupKey::Author("a".into()));
        assert_eq!(r.passing.len(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(GateConfig::new(0.0, GateScope::Repo, 30).is_err());
        assert!(GateConfig::new(f64::NAN, GateScope::Repo, 30).is_err());
        assert!(GateConfig::new(1.0, GateScope::Repo, 0).is_err());
    }

    #[test]
    fn durations_and_scopes() {
        assert_eq!(parse_duration("90", TimeUnit::Seconds), Ok(90.0));
        assert_eq!(parse_duration("2", TimeUnit::Days), Ok(172_800.0));
        assert_eq!(parse_duration("1.5h", TimeUnit::Days), Ok(5400.0));
        assert_eq!(parse_duration("3m", TimeUnit::Days), Ok(180.0));
        assert!(parse_duration("abc", TimeUnit::Days).is_err());
        assert!(parse_duration("5y", TimeUnit::Days).is_err());
        assert_eq!("path-prefix:2".parse(), Ok(GateScope::PathPrefix(2)));
        assert_eq!("author".parse(), Ok(GateScope::Author));
        assert!("path-prefix:0".parse::<GateScope>().is_err());
    }
}
