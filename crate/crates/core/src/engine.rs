//! The commit walk that turns a history into per-hunk TTM records.
//!
//! Each commit is handled in two strictly ordered phases. Attribution blames
//! the *old* side of every hunk at the first parent and marks the owning
//! registered hunks as modified by this commit; registration then records
//! the hunks this commit introduces. Running attribution first means a hunk
//! can never be modified by its own introducing commit.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hunk_index::{
    BackendKind, BackendOptions, DiskIndex, HunkIndex, HunkKey, HunkRecord, IndexError,
    MarkOutcome, MemoryIndex, ModState,
};
use crate::repo_source::{
    BlameSpan, CommitId, CommitMeta, DiffOptions, GitRepo, LineRange, RangeOptions, RepoError,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Measured { ttm_seconds: i64, first_mod_sha: CommitId },
    /// The first modifying commit carries an earlier timestamp than the
    /// introducing one (rewritten or skewed history).
    NegativeDelta { ttm_seconds: i64, first_mod_sha: CommitId },
    /// No modification observed within the analyzed range.
    Censored,
}

impl Outcome {
    pub fn ttm_seconds(&self) -> Option<i64> {
        match self {
            Outcome::Measured { ttm_seconds, .. } | Outcome::NegativeDelta { ttm_seconds, .. } => {
                Some(*ttm_seconds)
            }
            Outcome::Censored => None,
        }
    }

    pub fn first_mod_sha(&self) -> Option<&CommitId> {
        match self {
            Outcome::Measured { first_mod_sha, .. }
            | Outcome::NegativeDelta { first_mod_sha, .. } => Some(first_mod_sha),
            Outcome::Censored => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Measured { .. } => "measured",
            Outcome::NegativeDelta { .. } => "negative_delta",
            Outcome::Censored => "censored",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TtmRecord {
    pub key: HunkKey,
    pub author_id: String,
    pub intro_ts: i64,
    pub outcome: Outcome,
}

impl TtmRecord {
    pub fn from_hunk(record: HunkRecord) -> Self {
        let outcome = match record.state {
            ModState::Unmodified => Outcome::Censored,
            ModState::Modified {
                first_mod_sha,
                first_mod_ts,
            } => {
                let ttm_seconds = first_mod_ts - record.intro_ts;
                if ttm_seconds >= 0 {
                    Outcome::Measured {
                        ttm_seconds,
                        first_mod_sha,
                    }
                } else {
                    Outcome::NegativeDelta {
                        ttm_seconds,
                        first_mod_sha,
                    }
                }
            }
        };
        Self {
            key: record.key,
            author_id: record.author_id,
            intro_ts: record.intro_ts,
            outcome,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitCounters {
    pub files_changed: usize,
    pub hunks_seen: usize,
    pub lines_blamed: usize,
    pub marks_recorded: usize,
    pub marks_repeated: usize,
    pub unattributed_lines: usize,
    pub hunks_registered: usize,
    pub binary_files_skipped: usize,
    pub submodules_skipped: usize,
}

impl std::ops::AddAssign for CommitCounters {
    fn add_assign(&mut self, o: Self) {
        self.files_changed += o.files_changed;
        self.hunks_seen += o.hunks_seen;
        self.lines_blamed += o.lines_blamed;
        self.marks_recorded += o.marks_recorded;
        self.marks_repeated += o.marks_repeated;
        self.unattributed_lines += o.unattributed_lines;
        self.hunks_registered += o.hunks_registered;
        self.binary_files_skipped += o.binary_files_skipped;
        self.submodules_skipped += o.submodules_skipped;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub commits_processed: usize,
    /// Total hunks registered (H in the cost model).
    pub hunks_registered: usize,
    /// Distinct normalized authors among analyzed commits (D).
    pub distinct_authors: usize,
    /// Commits in the analyzed range (T).
    pub commits_total_in_range: usize,
    pub binary_files_skipped: usize,
    pub submodules_skipped: usize,
    pub unattributed_lines: usize,
    pub first_commit_ts: i64,
    pub last_commit_ts: i64,
    /// Not serialized, so written metadata stays reproducible.
    #[serde(skip)]
    pub wall_seconds: f64,
    pub backend_kind: BackendKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineOptions {
    /// Concurrent blame queries per commit; 0 and 1 both mean sequential.
    pub workers: usize,
    pub rename_threshold: Option<u8>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            rename_threshold: Some(50),
        }
    }
}

fn open_index(repo: &GitRepo, backend: &BackendOptions) -> Result<Box<dyn HunkIndex>, EngineError> {
    Ok(match backend.kind {
        BackendKind::Memory => Box::new(MemoryIndex::new()),
        BackendKind::Disk => {
            let store = backend.store_path.as_deref().ok_or(IndexError::MissingStorePath)?;
            Box::new(DiskIndex::create(store, &repo.identifier(), backend.cache_buckets)?)
        }
    })
}

/// Analyze a whole range. A disk store is always started fresh; on failure
/// its files are removed so no partial result survives.
pub fn process_repository(
    repo_path: &Path,
    range: &RangeOptions,
    backend: &BackendOptions,
    opts: &EngineOptions,
) -> Result<(Box<dyn HunkIndex>, RunMetadata), EngineError> {
    let started = Instant::now();
    let repo = GitRepo::open(repo_path)?.with_options(DiffOptions {
        rename_threshold: opts.rename_threshold,
        blame_first_parent: range.first_parent,
    });
    let commits = repo.list_commits(range)?;
    let mut index = open_index(&repo, backend)?;

    let walked = walk(&repo, &commits, index.as_mut(), opts.workers)
        .and_then(|totals| index.flush().map(|_| totals).map_err(EngineError::from));
    let totals = match walked {
        Ok(totals) => totals,
        Err(e) => {
            drop(index);
            if let (BackendKind::Disk, Some(store)) = (backend.kind, &backend.store_path) {
                let _ = crate::hunk_index::remove_store(store);
            }
            return Err(e);
        }
    };

    let authors: BTreeSet<&str> = commits.iter().map(|c| c.author_id.as_str()).collect();
    let metadata = RunMetadata {
        commits_processed: commits.len(),
        hunks_registered: totals.hunks_registered,
        distinct_authors: authors.len(),
        commits_total_in_range: commits.len(),
        binary_files_skipped: totals.binary_files_skipped,
        submodules_skipped: totals.submodules_skipped,
        unattributed_lines: totals.unattributed_lines,
        first_commit_ts: commits.first().map_or(0, |c| c.committer_ts),
        last_commit_ts: commits.last().map_or(0, |c| c.committer_ts),
        wall_seconds: started.elapsed().as_secs_f64(),
        backend_kind: index.kind(),
    };
    Ok((index, metadata))
}

fn walk(
    repo: &GitRepo,
    commits: &[CommitMeta],
    index: &mut dyn HunkIndex,
    workers: usize,
) -> Result<CommitCounters, EngineError> {
    let mut totals = CommitCounters::default();
    for commit in commits {
        totals += process_commit(repo, commit, index, workers)?;
    }
    Ok(totals)
}

type BlameJob = (String, Vec<LineRange>);
type BlameResult = Result<Vec<Vec<BlameSpan>>, RepoError>;

fn run_blames(repo: &GitRepo, parent: &CommitId, jobs: &[BlameJob], workers: usize) -> Vec<BlameResult> {
    let blame = |(path, ranges): &BlameJob| repo.blame_ranges(parent, path, ranges);
    let threads = workers.min(jobs.len());
    if threads <= 1 {
        return jobs.iter().map(blame).collect();
    }
    let mut results: Vec<Option<BlameResult>> = (0..jobs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                scope.spawn(move || {
                    (t..jobs.len())
                        .step_by(threads)
                        .map(|i| (i, blame(&jobs[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for handle in handles {
            for (i, r) in handle.join().expect("blame worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

/// Apply one commit to the index. All earlier commits must already have been
/// processed.
pub fn process_commit(
    repo: &GitRepo,
    commit: &CommitMeta,
    index: &mut dyn HunkIndex,
    workers: usize,
) -> Result<CommitCounters, EngineError> {
    let diff = repo.diff_commit(commit, 0)?;
    let mut counters = CommitCounters {
        files_changed: diff.files.len(),
        hunks_seen: diff.files.iter().map(|f| f.hunks.len()).sum(),
        binary_files_skipped: diff.binary_files_skipped,
        submodules_skipped: diff.submodules_skipped,
        ..CommitCounters::default()
    };

    // Attribution: old ranges are blamed at the parent.
    if let Some(parent) = commit.parents.first() {
        let mut by_path: BTreeMap<&str, Vec<LineRange>> = BTreeMap::new();
        for file in &diff.files {
            let Some(old_path) = file.old_path.as_deref() else {
                continue;
            };
            for h in file.hunks.iter().filter(|h| h.old_len > 0) {
                by_path
                    .entry(old_path)
                    .or_default()
                    .push(LineRange::new(h.old_start, h.old_len));
            }
        }
        let jobs: Vec<BlameJob> = by_path
            .into_iter()
            .map(|(p, ranges)| (p.to_string(), ranges))
            .collect();
        for result in run_blames(repo, parent, &jobs, workers) {
            for spans in result? {
                for span in spans {
                    attribute_span(index, &span, commit, &mut counters)?;
                }
            }
        }
    }

    // Registration.
    for file in &diff.files {
        let Some(new_path) = file.new_path.as_deref() else {
            continue;
        };
        for h in file.hunks.iter().filter(|h| h.new_len > 0) {
            let key = HunkKey::new(
                commit.sha.clone(),
                new_path,
                h.new_start,
                h.new_start + h.new_len - 1,
            );
            index.register(HunkRecord::new(key, commit.committer_ts, commit.author_id.clone()))?;
            counters.hunks_registered += 1;
        }
    }
    Ok(counters)
}

fn attribute_span(
    index: &mut dyn HunkIndex,
    span: &BlameSpan,
    commit: &CommitMeta,
    counters: &mut CommitCounters,
) -> Result<(), EngineError> {
    let mut line = span.origin_start;
    let end = span.origin_start + span.span_len;
    while line < end {
        counters.lines_blamed += 1;
        match index.lookup(&span.origin_sha, &span.origin_path, line)? {
            Some(owner) => {
                match index.mark_modified(&owner.key, &commit.sha, commit.committer_ts)? {
                    MarkOutcome::Recorded => counters.marks_recorded += 1,
                    MarkOutcome::AlreadyModified => counters.marks_repeated += 1,
                }
                // The rest of this owner's lines would only repeat the mark.
                let owned_until = (owner.key.new_end + 1).min(end);
                counters.lines_blamed += (owned_until - line - 1) as usize;
                line = owned_until;
            }
            None => {
                counters.unattributed_lines += 1;
                line += 1;
            }
        }
    }
    Ok(())
}

/// One record per registered hunk, in the index's canonical order.
pub fn collect_records(index: &dyn HunkIndex) -> Result<Vec<TtmRecord>, IndexError> {
    Ok(index
        .iterate_all()?
        .into_iter()
        .map(TtmRecord::from_hunk)
        .collect())
}

/// Convenience wrapper: analyze and collect in one call.
pub fn analyze(
    repo_path: &Path,
    range: &RangeOptions,
    backend: &BackendOptions,
    opts: &EngineOptions,
) -> Result<(Vec<TtmRecord>, RunMetadata), EngineError> {
    let (index, meta) = process_repository(repo_path, range, backend, opts)?;
    Ok((collect_records(index.as_ref())?, meta))
}

/// Where a disk-backed run keeps its store when the caller does not say.
pub fn default_store_path(out_dir: &Path) -> PathBuf {
    out_dir.join("store")
}
