use std::collections::{BTreeMap, HashMap};

use super::{
    check_registrable, sort_records, BackendKind, HunkIndex, HunkKey, HunkRecord, IndexError,
    MarkOutcome, ModState,
};
use crate::repo_source::CommitId;

type Bucket = BTreeMap<u32, HunkRecord>;

/// All hunks in process memory, bucketed by commit then path, each bucket
/// ordered by start line.
#[derive(Debug, Default)]
pub struct MemoryIndex {
    buckets: HashMap<CommitId, HashMap<String, Bucket>>,
    count: usize,
}

impl MemoryIndex {
    pub fn new() -> Self {
        Self::default()
    }

    fn bucket(&self, sha: &str, path: &str) -> Option<&Bucket> {
        self.buckets.get(sha)?.get(path)
    }

    fn find_mut(&mut self, key: &HunkKey) -> Option<&mut HunkRecord> {
        let record = self
            .buckets
            .get_mut(key.intro_sha.as_str())?
            .get_mut(key.path.as_str())?
            .get_mut(&key.new_start)?;
        (record.key.new_end == key.new_end).then_some(record)
    }
}

/// The record in `bucket` that covers `line`, if any.
pub(super) fn covering<T>(bucket: &BTreeMap<u32, T>, line: u32, end_of: impl Fn(&T) -> u32) -> Option<&T> {
    let (_, candidate) = bucket.range(..=line).next_back()?;
    (line <= end_of(candidate)).then_some(candidate)
}

/// True if `[start, end]` intersects any range already in `bucket`.
pub(super) fn overlaps<T>(bucket: &BTreeMap<u32, T>, start: u32, end: u32, end_of: impl Fn(&T) -> u32) -> bool {
    match bucket.range(..=end).next_back() {
        Some((_, prev)) => end_of(prev) >= start,
        None => false,
    }
}

impl HunkIndex for MemoryIndex {
    fn kind(&self) -> BackendKind {
        BackendKind::Memory
    }

    fn register(&mut self, record: HunkRecord) -> Result<(), IndexError> {
        check_registrable(&record)?;
        let key = &record.key;
        let bucket = self
            .buckets
            .entry(key.intro_sha.clone())
            .or_default()
            .entry(key.path.clone())
            .or_default();
        if overlaps(bucket, key.new_start, key.new_end, |r| r.key.new_end) {
            return Err(IndexError::DuplicateOrOverlappingKey(key.clone()));
        }
        bucket.insert(key.new_start, record);
        self.count += 1;
        Ok(())
    }

    fn lookup(
        &self,
        origin_sha: &CommitId,
        path: &str,
        line: u32,
    ) -> Result<Option<HunkRecord>, IndexError> {
        Ok(self
            .bucket(origin_sha.as_str(), path)
            .and_then(|b| covering(b, line, |r| r.key.new_end))
            .cloned())
    }

    fn mark_modified(
        &mut self,
        key: &HunkKey,
        mod_sha: &CommitId,
        mod_ts: i64,
    ) -> Result<MarkOutcome, IndexError> {
        let record = self
            .find_mut(key)
            .ok_or_else(|| IndexError::UnknownKey(key.clone()))?;
        match record.state {
            ModState::Modified { .. } => Ok(MarkOutcome::AlreadyModified),
            ModState::Unmodified => {
                record.state = ModState::Modified {
                    first_mod_sha: mod_sha.clone(),
                    first_mod_ts: mod_ts,
                };
                Ok(MarkOutcome::Recorded)
            }
        }
    }

    fn iterate_all(&self) -> Result<Vec<HunkRecord>, IndexError> {
        let mut all: Vec<HunkRecord> = self
            .buckets
            .values()
            .flat_map(|paths| paths.values())
            .flat_map(|bucket| bucket.values().cloned())
            .collect();
        sort_records(&mut all);
        Ok(all)
    }

    fn len(&self) -> usize {
        self.count
    }
}
