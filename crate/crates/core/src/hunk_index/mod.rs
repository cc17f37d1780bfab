//! Registry of introduced hunks, keyed by (introducing commit, path, line range).
//!
//! Two interchangeable backends implement [`HunkIndex`]: [`MemoryIndex`] keeps
//! every record in process memory, [`DiskIndex`] persists an append-only
//! record log and keeps only keys in memory, with an LRU cache of recently
//! used `(commit, path)` buckets.

mod disk;
mod memory;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::repo_source::CommitId;

pub use disk::{remove_store, DiskIndex, DEFAULT_CACHE_BUCKETS};
pub use memory::MemoryIndex;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("hunk {0} overlaps an existing registration")]
    DuplicateOrOverlappingKey(HunkKey),
    #[error("unknown hunk {0}")]
    UnknownKey(HunkKey),
    #[error("only unmodified records can be registered: {0}")]
    AlreadyModifiedOnRegister(HunkKey),
    #[error("invalid hunk key {0}: start must not exceed end")]
    InvalidKey(HunkKey),
    #[error("store at {path} is not writable: {source}")]
    StoreUnwritable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("store at {path} is corrupt: {reason}")]
    StoreCorrupt { path: PathBuf, reason: String },
    #[error("store I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("disk backend requires a store path")]
    MissingStorePath,
}

/// Identity of an introduced hunk; the line range is inclusive on both ends.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HunkKey {
    pub intro_sha: CommitId,
    pub path: String,
    pub new_start: u32,
    pub new_end: u32,
}

impl HunkKey {
    pub fn new(intro_sha: CommitId, path: impl Into<String>, new_start: u32, new_end: u32) -> Self {
        Self {
            intro_sha,
            path: path.into(),
            new_start,
            new_end,
        }
    }

    pub fn contains(&self, line: u32) -> bool {
        self.new_start <= line && line <= self.new_end
    }

    pub fn line_count(&self) -> u32 {
        self.new_end - self.new_start + 1
    }
}

impl fmt::Display for HunkKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}-{}",
            self.intro_sha.short(),
            self.path,
            self.new_start,
            self.new_end
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModState {
    Unmodified,
    Modified { first_mod_sha: CommitId, first_mod_ts: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HunkRecord {
    pub key: HunkKey,
    pub intro_ts: i64,
    pub author_id: String,
    pub state: ModState,
}

impl HunkRecord {
    pub fn new(key: HunkKey, intro_ts: i64, author_id: impl Into<String>) -> Self {
        Self {
            key,
            intro_ts,
            author_id: author_id.into(),
            state: ModState::Unmodified,
        }
    }

    fn sort_key(&self) -> (i64, &CommitId, &str, u32) {
        (self.intro_ts, &self.key.intro_sha, &self.key.path, self.key.new_start)
    }
}

/// Sort into the canonical iteration order: intro time, sha, path, start line.
pub fn sort_records(records: &mut [HunkRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkOutcome {
    Recorded,
    AlreadyModified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[serde(rename = "mem")]
    Memory,
    Disk,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Memory => "mem",
            BackendKind::Disk => "disk",
        })
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mem" | "memory" => Ok(BackendKind::Memory),
            "disk" => Ok(BackendKind::Disk),
            other => Err(format!("unknown backend {other:?} (expected mem or disk)")),
        }
    }
}

/// Writes take `&mut self`, so a reader can never observe a half-applied
/// `mark_modified`; lookups may run concurrently through `&self`.
pub trait HunkIndex: Send + Sync {
    fn kind(&self) -> BackendKind;

    fn register(&mut self, record: HunkRecord) -> Result<(), IndexError>;

    fn lookup(&self, origin_sha: &CommitId, path: &str, line: u32)
        -> Result<Option<HunkRecord>, IndexError>;

    fn mark_modified(
        &mut self,
        key: &HunkKey,
        mod_sha: &CommitId,
        mod_ts: i64,
    ) -> Result<MarkOutcome, IndexError>;

    /// Every record once, in [`sort_records`] order.
    fn iterate_all(&self) -> Result<Vec<HunkRecord>, IndexError>;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Make all writes durable. A no-op for the memory backend.
    fn flush(&mut self) -> Result<(), IndexError> {
        Ok(())
    }
}

fn check_registrable(record: &HunkRecord) -> Result<(), IndexError> {
    if record.key.new_start > record.key.new_end {
        return Err(IndexError::InvalidKey(record.key.clone()));
    }
    if record.state != ModState::Unmodified {
        return Err(IndexError::AlreadyModifiedOnRegister(record.key.clone()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendOptions {
    pub kind: BackendKind,
    pub store_path: Option<PathBuf>,
    pub cache_buckets: usize,
}

impl BackendOptions {
    pub fn memory() -> Self {
        Self {
            kind: BackendKind::Memory,
            store_path: None,
            cache_buckets: DEFAULT_CACHE_BUCKETS,
        }
    }

    pub fn disk(store_path: impl Into<PathBuf>) -> Self {
        Self {
            kind: BackendKind::Disk,
            store_path: Some(store_path.into()),
            cache_buckets: DEFAULT_CACHE_BUCKETS,
        }
    }
}

/// Open an index. A disk store that already exists is reopened by replaying
/// its log; otherwise a new empty store is created.
pub fn open_backend(
    kind: BackendKind,
    store_path: Option<&Path>,
) -> Result<Box<dyn HunkIndex>, IndexError> {
    match kind {
        BackendKind::Memory => Ok(Box::new(MemoryIndex::new())),
        BackendKind::Disk => {
            let path = store_path.ok_or(IndexError::MissingStorePath)?;
            if DiskIndex::exists(path) {
                Ok(Box::new(DiskIndex::open(path, DEFAULT_CACHE_BUCKETS)?))
            } else {
                Ok(Box::new(DiskIndex::create(path, "", DEFAULT_CACHE_BUCKETS)?))
            }
        }
    }
}
