//! File-backed hunk store.
//!
//! A store is a directory holding two files:
//!
//! * `meta`: two lines, `format=1` and `repo=<identifier>`.
//! * `hunks.log`: append-only, one event per line. Each line is
//!   `<crc32 as 8 lowercase hex digits> <json>\n`, where the checksum covers
//!   the JSON bytes exactly. Events are either
//!   `{"op":"register","intro_sha":..,"path":..,"new_start":..,"new_end":..,"intro_ts":..,"author":..}`
//!   or
//!   `{"op":"modified","intro_sha":..,"path":..,"new_start":..,"new_end":..,"mod_sha":..,"mod_ts":..}`.
//!
//! Opening a store replays the log into an in-memory key index that holds
//! only line ranges and file offsets. Full records are read back from the
//! log on demand and cached per `(commit, path)` bucket.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use lru::LruCache;
use serde::{Deserialize, Serialize};

use super::memory::overlaps;
use super::{
    check_registrable, sort_records, BackendKind, HunkIndex, HunkKey, HunkRecord, IndexError,
    MarkOutcome, ModState,
};
use crate::repo_source::CommitId;

pub const DEFAULT_CACHE_BUCKETS: usize = 4096;
pub const FORMAT_VERSION: u32 = 1;
pub const LOG_FILE: &str = "hunks.log";
pub const META_FILE: &str = "meta";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum LogEvent {
    Register {
        intro_sha: CommitId,
        path: String,
        new_start: u32,
        new_end: u32,
        intro_ts: i64,
        author: String,
    },
    Modified {
        intro_sha: CommitId,
        path: String,
        new_start: u32,
        new_end: u32,
        mod_sha: CommitId,
        mod_ts: i64,
    },
}

fn encode_line(event: &LogEvent) -> Vec<u8> {
    let json = serde_json::to_vec(event).expect("log events always serialize");
    let mut line = format!("{:08x} ", crc32fast::hash(&json)).into_bytes();
    line.extend_from_slice(&json);
    line.push(b'\n');
    line
}

fn decode_line(line: &[u8]) -> Result<LogEvent, String> {
    let body = line
        .strip_suffix(b"\n")
        .ok_or_else(|| "truncated record (no line terminator)".to_string())?;
    if body.len() < 10 || body[8] != b' ' {
        return Err("malformed record prefix".into());
    }
    let crc_hex = std::str::from_utf8(&body[..8]).map_err(|_| "bad checksum field")?;
    let expected = u32::from_str_radix(crc_hex, 16).map_err(|_| "bad checksum field")?;
    let json = &body[9..];
    if crc32fast::hash(json) != expected {
        return Err("checksum mismatch".into());
    }
    serde_json::from_slice(json).map_err(|e| format!("undecodable record: {e}"))
}

#[derive(Debug, Clone)]
struct Slot {
    end: u32,
    register_at: u64,
    modified_at: Option<u64>,
}

#[derive(Debug, Default)]
struct Bucket {
    id: u64,
    slots: BTreeMap<u32, Slot>,
}

type CachedBucket = BTreeMap<u32, HunkRecord>;

struct Io {
    writer: BufWriter<File>,
    reader: BufReader<File>,
    unflushed: bool,
    cache: LruCache<u64, CachedBucket>,
}

impl Io {
    fn read_event(&mut self, offset: u64) -> Result<Result<LogEvent, String>, IndexError> {
        if self.unflushed {
            self.writer.flush()?;
            self.unflushed = false;
        }
        self.reader.seek(SeekFrom::Start(offset))?;
        let mut line = Vec::new();
        self.reader.read_until(b'\n', &mut line)?;
        Ok(decode_line(&line))
    }
}

pub struct DiskIndex {
    dir: PathBuf,
    repo_id: String,
    buckets: HashMap<CommitId, HashMap<String, Bucket>>,
    next_bucket_id: u64,
    count: usize,
    log_len: u64,
    io: Mutex<Io>,
}

impl std::fmt::Debug for DiskIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiskIndex")
            .field("dir", &self.dir)
            .field("repo_id", &self.repo_id)
            .field("count", &self.count)
            .finish()
    }
}

impl DiskIndex {
    pub fn exists(dir: &Path) -> bool {
        dir.join(META_FILE).is_file()
    }

    /// Create an empty store, replacing the log and meta of any store already
    /// in `dir`. Other files in the directory are left alone.
    pub fn create(dir: &Path, repo_id: &str, cache_buckets: usize) -> Result<Self, IndexError> {
        let unwritable = |source| IndexError::StoreUnwritable {
            path: dir.to_path_buf(),
            source,
        };
        fs::create_dir_all(dir).map_err(unwritable)?;
        let meta = format!("format={FORMAT_VERSION}\nrepo={}\n", repo_id.replace('\n', " "));
        fs::write(dir.join(META_FILE), meta).map_err(unwritable)?;
        File::create(dir.join(LOG_FILE)).map_err(unwritable)?;
        Self::open_files(dir, repo_id.to_string(), cache_buckets)
    }

    /// Reopen an existing store, verifying every log record.
    pub fn open(dir: &Path, cache_buckets: usize) -> Result<Self, IndexError> {
        let corrupt = |reason: String| IndexError::StoreCorrupt {
            path: dir.to_path_buf(),
            reason,
        };
        let meta = fs::read_to_string(dir.join(META_FILE))
            .map_err(|e| corrupt(format!("unreadable meta: {e}")))?;
        let mut format = None;
        let mut repo = None;
        for line in meta.lines() {
            match line.split_once('=') {
                Some(("format", v)) => format = v.parse::<u32>().ok(),
                Some(("repo", v)) => repo = Some(v.to_string()),
                _ => return Err(corrupt(format!("unexpected meta line {line:?}"))),
            }
        }
        if format != Some(FORMAT_VERSION) {
            return Err(corrupt(format!("unsupported format {format:?}")));
        }
        let repo = repo.ok_or_else(|| corrupt("meta lacks repo".into()))?;
        let mut index = Self::open_files(dir, repo, cache_buckets)?;
        index.replay()?;
        Ok(index)
    }

    fn open_files(dir: &Path, repo_id: String, cache_buckets: usize) -> Result<Self, IndexError> {
        let log_path = dir.join(LOG_FILE);
        let unwritable = |source| IndexError::StoreUnwritable {
            path: dir.to_path_buf(),
            source,
        };
        let append = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(unwritable)?;
        let log_len = append.metadata().map_err(unwritable)?.len();
        let read = File::open(&log_path)?;
        let capacity = NonZeroUsize::new(cache_buckets.max(1)).expect("capacity is at least one");
        Ok(Self {
            dir: dir.to_path_buf(),
            repo_id,
            buckets: HashMap::new(),
            next_bucket_id: 0,
            count: 0,
            log_len,
            io: Mutex::new(Io {
                writer: BufWriter::new(append),
                reader: BufReader::new(read),
                unflushed: false,
                cache: LruCache::new(capacity),
            }),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn repo_id(&self) -> &str {
        &self.repo_id
    }

    /// Remove the store's files (not the directory itself).
    pub fn destroy(self) -> Result<(), IndexError> {
        let dir = self.dir.clone();
        drop(self);
        remove_store(&dir)
    }

    fn corrupt(&self, reason: impl Into<String>) -> IndexError {
        IndexError::StoreCorrupt {
            path: self.dir.clone(),
            reason: reason.into(),
        }
    }

    fn replay(&mut self) -> Result<(), IndexError> {
        let mut reader = BufReader::new(File::open(self.dir.join(LOG_FILE))?);
        let mut offset = 0u64;
        let mut line = Vec::new();
        let mut line_no = 0usize;
        loop {
            line.clear();
            let n = reader.read_until(b'\n', &mut line)?;
            if n == 0 {
                break;
            }
            line_no += 1;
            let event = decode_line(&line).map_err(|r| self.corrupt(format!("line {line_no}: {r}")))?;
            match event {
                LogEvent::Register {
                    intro_sha,
                    path,
                    new_start,
                    new_end,
                    ..
                } => {
                    if new_start > new_end {
                        return Err(self.corrupt(format!("line {line_no}: inverted range")));
                    }
                    let bucket = self.bucket_entry(intro_sha, path);
                    if overlaps(&bucket.slots, new_start, new_end, |s| s.end) {
                        return Err(self.corrupt(format!("line {line_no}: overlapping registration")));
                    }
                    bucket.slots.insert(
                        new_start,
                        Slot {
                            end: new_end,
                            register_at: offset,
                            modified_at: None,
                        },
                    );
                    self.count += 1;
                }
                LogEvent::Modified {
                    intro_sha,
                    path,
                    new_start,
                    new_end,
                    ..
                } => {
                    let slot = self
                        .buckets
                        .get_mut(&intro_sha)
                        .and_then(|paths| paths.get_mut(&path))
                        .and_then(|b| b.slots.get_mut(&new_start))
                        .filter(|s| s.end == new_end);
                    match slot {
                        Some(slot) if slot.modified_at.is_none() => slot.modified_at = Some(offset),
                        Some(_) => {
                            return Err(self.corrupt(format!("line {line_no}: second modification")))
                        }
                        None => return Err(self.corrupt(format!("line {line_no}: unknown hunk"))),
                    }
                }
            }
            offset += n as u64;
        }
        if offset != self.log_len {
            return Err(self.corrupt("log changed during replay"));
        }
        Ok(())
    }

    fn bucket_entry(&mut self, sha: CommitId, path: String) -> &mut Bucket {
        let next_id = &mut self.next_bucket_id;
        self.buckets
            .entry(sha)
            .or_default()
            .entry(path)
            .or_insert_with(|| {
                *next_id += 1;
                Bucket {
                    id: *next_id,
                    slots: BTreeMap::new(),
                }
            })
    }

    fn find_bucket(&self, sha: &str, path: &str) -> Option<&Bucket> {
        self.buckets.get(sha)?.get(path)
    }

    fn append(&mut self, event: &LogEvent) -> Result<u64, IndexError> {
        let line = encode_line(event);
        let offset = self.log_len;
        let io = self.io.get_mut().expect("store lock poisoned");
        io.writer.write_all(&line)?;
        io.unflushed = true;
        self.log_len += line.len() as u64;
        Ok(offset)
    }

    fn load_record(&self, io: &mut Io, slot: &Slot) -> Result<HunkRecord, IndexError> {
        let event = io
            .read_event(slot.register_at)?
            .map_err(|r| self.corrupt(format!("at offset {}: {r}", slot.register_at)))?;
        let LogEvent::Register {
            intro_sha,
            path,
            new_start,
            new_end,
            intro_ts,
            author,
        } = event
        else {
            return Err(self.corrupt(format!("expected registration at {}", slot.register_at)));
        };
        let mut record = HunkRecord::new(HunkKey::new(intro_sha, path, new_start, new_end), intro_ts, author);
        if let Some(at) = slot.modified_at {
            let event = io
                .read_event(at)?
                .map_err(|r| self.corrupt(format!("at offset {at}: {r}")))?;
            let LogEvent::Modified { mod_sha, mod_ts, .. } = event else {
                return Err(self.corrupt(format!("expected modification at {at}")));
            };
            record.state = ModState::Modified {
                first_mod_sha: mod_sha,
                first_mod_ts: mod_ts,
            };
        }
        Ok(record)
    }

    fn load_bucket(&self, io: &mut Io, bucket: &Bucket) -> Result<CachedBucket, IndexError> {
        bucket
            .slots
            .iter()
            .map(|(start, slot)| Ok((*start, self.load_record(io, slot)?)))
            .collect()
    }

    /// Reads and verifies the whole log sequentially.
    fn scan_log(&self) -> Result<Vec<HunkRecord>, IndexError> {
        {
            let mut io = self.io.lock().expect("store lock poisoned");
            io.writer.flush()?;
            io.unflushed = false;
        }
        let mut raw = Vec::new();
        File::open(self.dir.join(LOG_FILE))?
            .take(self.log_len)
            .read_to_end(&mut raw)?;
        let mut records: BTreeMap<HunkKey, HunkRecord> = BTreeMap::new();
        for (i, line) in raw.split_inclusive(|&b| b == b'\n').enumerate() {
            match decode_line(line).map_err(|r| self.corrupt(format!("line {}: {r}", i + 1)))? {
                LogEvent::Register {
                    intro_sha,
                    path,
                    new_start,
                    new_end,
                    intro_ts,
                    author,
                } => {
                    let key = HunkKey::new(intro_sha, path, new_start, new_end);
                    records.insert(key.clone(), HunkRecord::new(key, intro_ts, author));
                }
                LogEvent::Modified {
                    intro_sha,
                    path,
                    new_start,
                    new_end,
                    mod_sha,
                    mod_ts,
                } => {
                    let key = HunkKey::new(intro_sha, path, new_start, new_end);
                    let record = records
                        .get_mut(&key)
                        .ok_or_else(|| self.corrupt(format!("line {}: unknown hunk", i + 1)))?;
                    record.state = ModState::Modified {
                        first_mod_sha: mod_sha,
                        first_mod_ts: mod_ts,
                    };
                }
            }
        }
        Ok(records.into_values().collect())
    }
}

impl Drop for DiskIndex {
    fn drop(&mut self) {
        if let Ok(io) = self.io.get_mut() {
            let _ = io.writer.flush();
        }
    }
}

impl HunkIndex for DiskIndex {
    fn kind(&self) -> BackendKind {
        BackendKind::Disk
    }

    fn register(&mut self, record: HunkRecord) -> Result<(), IndexError> {
        check_registrable(&record)?;
        let HunkRecord {
            key,
            intro_ts,
            author_id,
            ..
        } = record;
        if let Some(bucket) = self.find_bucket(key.intro_sha.as_str(), &key.path) {
            if overlaps(&bucket.slots, key.new_start, key.new_end, |s| s.end) {
                return Err(IndexError::DuplicateOrOverlappingKey(key));
            }
        }
        let offset = self.append(&LogEvent::Register {
            intro_sha: key.intro_sha.clone(),
            path: key.path.clone(),
            new_start: key.new_start,
            new_end: key.new_end,
            intro_ts,
            author: author_id.clone(),
        })?;
        let bucket = self.bucket_entry(key.intro_sha.clone(), key.path.clone());
        bucket.slots.insert(
            key.new_start,
            Slot {
                end: key.new_end,
                register_at: offset,
                modified_at: None,
            },
        );
        let bucket_id = bucket.id;
        self.count += 1;
        let io = self.io.get_mut().expect("store lock poisoned");
        if let Some(cached) = io.cache.peek_mut(&bucket_id) {
            cached.insert(key.new_start, HunkRecord::new(key, intro_ts, author_id));
        }
        Ok(())
    }

    fn lookup(
        &self,
        origin_sha: &CommitId,
        path: &str,
        line: u32,
    ) -> Result<Option<HunkRecord>, IndexError> {
        let Some(bucket) = self.find_bucket(origin_sha.as_str(), path) else {
            return Ok(None);
        };
        let Some((&start, _)) = bucket
            .slots
            .range(..=line)
            .next_back()
            .filter(|(_, slot)| line <= slot.end)
        else {
            return Ok(None);
        };
        let mut io = self.io.lock().expect("store lock poisoned");
        if let Some(cached) = io.cache.get(&bucket.id) {
            return Ok(cached.get(&start).cloned());
        }
        let loaded = self.load_bucket(&mut io, bucket)?;
        let hit = loaded.get(&start).cloned();
        io.cache.put(bucket.id, loaded);
        Ok(hit)
    }

    fn mark_modified(
        &mut self,
        key: &HunkKey,
        mod_sha: &CommitId,
        mod_ts: i64,
    ) -> Result<MarkOutcome, IndexError> {
        let slot = self
            .find_bucket(key.intro_sha.as_str(), &key.path)
            .and_then(|b| b.slots.get(&key.new_start).map(|s| (b.id, s)))
            .filter(|(_, s)| s.end == key.new_end);
        let Some((bucket_id, slot)) = slot else {
            return Err(IndexError::UnknownKey(key.clone()));
        };
        if slot.modified_at.is_some() {
            return Ok(MarkOutcome::AlreadyModified);
        }
        let offset = self.append(&LogEvent::Modified {
            intro_sha: key.intro_sha.clone(),
            path: key.path.clone(),
            new_start: key.new_start,
            new_end: key.new_end,
            mod_sha: mod_sha.clone(),
            mod_ts,
        })?;
        if let Some(slot) = self
            .buckets
            .get_mut(key.intro_sha.as_str())
            .and_then(|p| p.get_mut(key.path.as_str()))
            .and_then(|b| b.slots.get_mut(&key.new_start))
        {
            slot.modified_at = Some(offset);
        }
        let io = self.io.get_mut().expect("store lock poisoned");
        if let Some(record) = io
            .cache
            .peek_mut(&bucket_id)
            .and_then(|cached| cached.get_mut(&key.new_start))
        {
            record.state = ModState::Modified {
                first_mod_sha: mod_sha.clone(),
                first_mod_ts: mod_ts,
            };
        }
        Ok(MarkOutcome::Recorded)
    }

    fn iterate_all(&self) -> Result<Vec<HunkRecord>, IndexError> {
        let mut records = self.scan_log()?;
        sort_records(&mut records);
        Ok(records)
    }

    fn len(&self) -> usize {
        self.count
    }

    fn flush(&mut self) -> Result<(), IndexError> {
        let io = self.io.get_mut().expect("store lock poisoned");
        io.writer.flush()?;
        io.unflushed = false;
        io.writer.get_ref().sync_data()?;
        Ok(())
    }
}

/// Remove a store's files if present. The directory itself is left alone.
pub fn remove_store(dir: &Path) -> Result<(), IndexError> {
    for name in [LOG_FILE, META_FILE] {
        match fs::remove_file(dir.join(name)) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hunk_index::contract::{self, rec, sha};

    #[test]
    fn satisfies_index_contract() {
        let dir = tempfile::tempdir().unwrap();
        let mut n = 0;
        contract::run_all(&mut || {
            n += 1;
            Box::new(DiskIndex::create(&dir.path().join(format!("s{n}")), "repo", 4).unwrap())
        });
    }

    #[test]
    fn reopen_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let before = {
            let mut idx = DiskIndex::create(dir.path(), "/some/repo", 8).unwrap();
            idx.register(rec(1, "a.txt", 1, 3, 10)).unwrap();
            idx.register(rec(2, "dir/b.txt", 4, 4, 20)).unwrap();
            idx.mark_modified(&rec(1, "a.txt", 1, 3, 10).key, &sha(2), 20).unwrap();
            idx.flush().unwrap();
            idx.iterate_all().unwrap()
        };
        let reopened = DiskIndex::open(dir.path(), 8).unwrap();
        assert_eq!(reopened.repo_id(), "/some/repo");
        assert_eq!(reopened.len(), 2);
        assert_eq!(reopened.iterate_all().unwrap(), before);
        let hit = reopened.lookup(&sha(1), "a.txt", 3).unwrap().unwrap();
        assert!(matches!(hit.state, ModState::Modified { first_mod_ts: 20, .. }));
    }

    #[test]
    fn log_lines_are_checksummed_json() {
        let dir = tempfile::tempdir().unwrap();
        let mut idx = DiskIndex::create(dir.path(), "r", 8).unwrap();
        idx.register(rec(1, "a", 1, 2, 5)).unwrap();
        idx.flush().unwrap();
        let log = fs::read_to_string(dir.path().join(LOG_FILE)).unwrap();
        let json = format!(
            "{{\"op\":\"register\",\"intro_sha\":\"{}\",\"path\":\"a\",\"new_start\":1,\"new_end\":2,\"intro_ts\":5,\"author\":\"dev1@x\"}}",
            sha(1)
        );
        assert_eq!(log, format!("{:08x} {json}\n", crc32fast::hash(json.as_bytes())));
        assert_eq!(
            fs::read_to_string(dir.path().join(META_FILE)).unwrap(),
            "format=1\nrepo=r\n"
        );
    }

    #[test]
    fn truncated_log_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut idx = DiskIndex::create(dir.path(), "r", 8).unwrap();
            idx.register(rec(1, "a", 1, 2, 5)).unwrap();
            idx.register(rec(1, "a", 4, 6, 5)).unwrap();
        }
        let path = dir.path().join(LOG_FILE);
        let len = fs::metadata(&path).unwrap().len();
        OpenOptions::new().write(true).open(&path).unwrap().set_len(len - 7).unwrap();
        assert!(matches!(
            DiskIndex::open(dir.path(), 8),
            Err(IndexError::StoreCorrupt { .. })
        ));
    }

    #[test]
    fn flipped_byte_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut idx = DiskIndex::create(dir.path(), "r", 8).unwrap();
            idx.register(rec(1, "a", 1, 2, 5)).unwrap();
        }
        let path = dir.path().join(LOG_FILE);
        let mut bytes = fs::read(&path).unwrap();
        let i = bytes.iter().position(|&b| b == b'5').unwrap();
        bytes[i] = b'6';
        fs::write(&path, bytes).unwrap();
        let err = DiskIndex::open(dir.path(), 8).unwrap_err();
        assert!(err.to_string().contains("checksum"), "{err}");
    }

    #[test]
    fn missing_or_wrong_meta_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(LOG_FILE), "").unwrap();
        assert!(matches!(DiskIndex::open(dir.path(), 8), Err(IndexError::StoreCorrupt { .. })));
        fs::write(dir.path().join(META_FILE), "format=2\nrepo=x\n").unwrap();
        assert!(matches!(DiskIndex::open(dir.path(), 8), Err(IndexError::StoreCorrupt { .. })));
    }

    #[test]
    fn unwritable_store_path() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain-file");
        fs::write(&file, "x").unwrap();
        assert!(matches!(
            DiskIndex::create(&file.join("store"), "r", 8),
            Err(IndexError::StoreUnwritable { .. })
        ));
    }

    #[test]
    fn cache_stays_coherent_under_eviction() {
        let dir = tempfile::tempdir().unwrap();
        let mut idx = DiskIndex::create(dir.path(), "r", 1).unwrap();
        for n in 1..=5u8 {
            idx.register(rec(n, "f", 1, 3, n as i64)).unwrap();
        }
        // warm the single cache slot, then mutate a bucket that is cached
        assert!(idx.lookup(&sha(3), "f", 2).unwrap().is_some());
        idx.mark_modified(&rec(3, "f", 1, 3, 3).key, &sha(9), 99).unwrap();
        idx.register(rec(3, "f", 5, 5, 3)).unwrap();
        let hit = idx.lookup(&sha(3), "f", 1).unwrap().unwrap();
        assert!(matches!(hit.state, ModState::Modified { first_mod_ts: 99, .. }));
        assert!(idx.lookup(&sha(3), "f", 5).unwrap().is_some());
        // evict and reload from the log
        assert!(idx.lookup(&sha(1), "f", 1).unwrap().is_some());
        let reloaded = idx.lookup(&sha(3), "f", 2).unwrap().unwrap();
        assert_eq!(reloaded, hit);
    }

    #[test]
    fn open_backend_reopens_existing_store() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut idx = super::super::open_backend(BackendKind::Disk, Some(dir.path())).unwrap();
            idx.register(rec(1, "a", 1, 1, 0)).unwrap();
            idx.register(rec(2, "a", 1, 1, 0)).unwrap();
        }
        let idx = super::super::open_backend(BackendKind::Disk, Some(dir.path())).unwrap();
        assert_eq!(idx.iterate_all().unwrap().len(), 2);
        assert!(matches!(
            super::super::open_backend(BackendKind::Disk, None),
            Err(IndexError::MissingStorePath)
        ));
    }
}
