//! Deterministic synthetic Git histories with controlled size, plus a
//! brute-force line-tracking oracle for their ground-truth TTM values.
//!
//! Every generated line is unique across the whole history, and edits to
//! one file within a commit are always separated by at least one untouched
//! line. Under those two conditions the minimal zero-context diff between
//! consecutive versions is unique, so `git diff` reports exactly the hunks
//! recorded in the manifest.

mod oracle;
pub mod script;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::repo_source::CommitId;
use script::{FileChange, ScriptedCommit};

pub use oracle::oracle_ttm;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const REPO_DIR: &str = "repo.git";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("output path {0} exists and is not empty")]
    PathNotEmpty(PathBuf),
    #[error("writing the repository failed: {0}")]
    GitWriteFailure(String),
    #[error("manifest does not describe a linear history: {0}")]
    NonLinearHistory(String),
    #[error("manifest is inconsistent: {0}")]
    InconsistentManifest(String),
    #[error("malformed manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditMix {
    pub add: f64,
    pub replace: f64,
    pub delete: f64,
}

impl EditMix {
    pub const ADD_ONLY: EditMix = EditMix {
        add: 1.0,
        replace: 0.0,
        delete: 0.0,
    };
}

impl Default for EditMix {
    fn default() -> Self {
        Self {
            add: 0.5,
            replace: 0.3,
            delete: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_commits: u32,
    pub n_devs: u32,
    pub files: u32,
    pub edit_mix: EditMix,
    /// Inclusive bounds on lines added or removed by one edit.
    pub lines_per_hunk: (u32, u32),
    /// Inclusive bounds on the gap between consecutive commit timestamps.
    pub inter_commit_seconds: (i64, i64),
    /// Inclusive bounds on edit attempts per commit.
    pub edits_per_commit: (u32, u32),
    /// When non-zero, the first commit seeds every file with this many lines.
    pub initial_file_lines: u32,
    pub start_ts: i64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            n_commits: 10,
            n_devs: 3,
            files: 2,
            edit_mix: EditMix::default(),
            lines_per_hunk: (1, 4),
            inter_commit_seconds: (60, 86_400),
            edits_per_commit: (1, 3),
            initial_file_lines: 0,
            start_ts: 1_600_000_000,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        let mix = &self.edit_mix;
        let fractions = [mix.add, mix.replace, mix.delete];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return bad("edit fractions must lie in [0, 1]");
        }
        if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("edit fractions must sum to 1");
        }
        if self.n_commits < 1 || self.n_devs < 1 || self.files < 1 {
            return bad("commit, developer and file counts must be at least 1");
        }
        let (lo, hi) = self.lines_per_hunk;
        if lo < 1 || lo > hi {
            return bad("lines_per_hunk must satisfy 1 <= min <= max");
        }
        let (lo, hi) = self.inter_commit_seconds;
        if lo < 1 || lo > hi {
            return bad("inter_commit_seconds must satisfy 1 <= min <= max");
        }
        let (lo, hi) = self.edits_per_commit;
        if lo < 1 || lo > hi {
            return bad("edits_per_commit must satisfy 1 <= min <= max");
        }
        if self.start_ts < 0 {
            return bad("start_ts must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Add,
    Replace,
    Delete,
}

/// One edit as recorded in the manifest. Ranges are `[start, len]` in
/// unified-diff header conventions (an empty side names the preceding line).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEvent {
    pub commit_index: u32,
    pub sha: CommitId,
    pub ts: i64,
    pub author: String,
    pub file: String,
    pub op: EditOp,
    pub old_range: [u32; 2],
    pub new_range: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub schema_version: u32,
    pub spec: SynthSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub header: ManifestHeader,
    pub events: Vec<ManifestEvent>,
}

impl Manifest {
    /// Hunks introduced across the history (edits that add lines).
    pub fn hunk_count(&self) -> usize {
        self.events.iter().filter(|e| e.new_range[1] > 0).count()
    }

    pub fn commit_count(&self) -> usize {
        self.events
            .iter()
            .map(|e| e.commit_index)
            .collect::<std::collections::BTreeSet<_>>()
            .len()
    }

    /// Header line, then one event per line.
    pub fn write_to(&self, mut w: impl Write) -> Result<(), SynthError> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for event in &self.events {
            serde_json::to_writer(&mut w, event)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), SynthError> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SynthError> {
        let mut lines = BufReader::new(fs::File::open(path)?).lines();
        let first = lines
            .next()
            .ok_or_else(|| SynthError::InconsistentManifest("empty manifest".into()))??;
        let header: ManifestHeader = serde_json::from_str(&first)?;
        if header.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(SynthError::InconsistentManifest(format!(
                "unsupported schema version {}",
                header.schema_version
            )));
        }
        let mut events = Vec::new();
        for line in lines {
            let line = line?;
            if !line.trim().is_empty() {
                events.push(serde_json::from_str(&line)?);
            }
        }
        Ok(Self { header, events })
    }
}

/// An edit planned against the old version of one file: old lines
/// `[start, end)` (0-based) are replaced by `lines`.
#[derive(Debug, Clone)]
struct Edit {
    start: usize,
    end: usize,
    op: EditOp,
    lines: Vec<String>,
}

impl Edit {
    /// Two edits stay separate hunks only if an untouched old line lies
    /// between them.
    fn separated_from(&self, other: &Edit) -> bool {
        other.start > self.end || self.start > other.end
    }
}

#[derive(Debug, Clone)]
struct PlannedEvent {
    commit_index: u32,
    file: String,
    op: EditOp,
    old_range: [u32; 2],
    new_range: [u32; 2],
}

struct Plan {
    commits: Vec<ScriptedCommit>,
    events: Vec<PlannedEvent>,
}

fn file_path(f: u32) -> String {
    format!("dir{}/file{}.txt", f % 3, f)
}

fn dev_identity(dev: u32) -> (String, String) {
    (format!("Dev {dev}"), format!("dev{dev}@synth.test"))
}

fn draw(rng: &mut ChaCha8Rng, range: (u32, u32)) -> u32 {
    rng.gen_range(range.0..=range.1)
}

fn plan(spec: &SynthSpec) -> Plan {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mix = spec.edit_mix;
    let ops = [EditOp::Add, EditOp::Replace, EditOp::Delete];
    let weights = WeightedIndex::new([mix.add, mix.replace, mix.delete]).ok();
    let mut contents: Vec<Vec<String>> = vec![Vec::new(); spec.files as usize];
    let mut commits = Vec::with_capacity(spec.n_commits as usize);
    let mut events = Vec::new();
    let mut ts = spec.start_ts;

    for c in 0..spec.n_commits {
        if c > 0 {
            let (lo, hi) = spec.inter_commit_seconds;
            ts += rng.gen_range(lo..=hi);
        }
        let fresh_line = |rng: &mut ChaCha8Rng, f: usize, e: usize, i: usize| {
            format!("c{c} f{f} e{e} l{i} {:016x}", rng.gen::<u64>())
        };

        let mut planned: BTreeMap<usize, Vec<Edit>> = BTreeMap::new();
        if c == 0 && spec.initial_file_lines > 0 {
            for f in 0..spec.files as usize {
                let lines = (0..spec.initial_file_lines as usize)
                    .map(|i| fresh_line(&mut rng, f, 0, i))
                    .collect();
                planned.entry(f).or_default().push(Edit {
                    start: 0,
                    end: 0,
                    op: EditOp::Add,
                    lines,
                });
            }
        } else {
            let attempts = draw(&mut rng, spec.edits_per_commit);
            for e in 0..attempts as usize {
                let f = rng.gen_range(0..spec.files as usize);
                let n = contents[f].len();
                let op = match (&weights, n) {
                    (_, 0) | (None, _) => EditOp::Add,
                    (Some(w), _) => ops[w.sample(&mut rng)],
                };
                let existing = planned.entry(f).or_default();
                for _ in 0..8 {
                    let (start, end) = match op {
                        EditOp::Add => {
                            let p = rng.gen_range(0..=n);
                            (p, p)
                        }
                        EditOp::Replace | EditOp::Delete => {
                            let len = draw(&mut rng, spec.lines_per_hunk) as usize;
                            let a = rng.gen_range(0..n);
                            (a, (a + len).min(n))
                        }
                    };
                    let candidate = Edit {
                        start,
                        end,
                        op,
                        lines: Vec::new(),
                    };
                    if existing.iter().all(|x| x.separated_from(&candidate)) {
                        let m = match op {
                            EditOp::Delete => 0,
                            _ => draw(&mut rng, spec.lines_per_hunk) as usize,
                        };
                        let lines = (0..m).map(|i| fresh_line(&mut rng, f, e, i)).collect();
                        existing.push(Edit { lines, ..candidate });
                        break;
                    }
                }
            }
        }

        let (name, email) = dev_identity(c % spec.n_devs);
        let mut commit = ScriptedCommit::new(ts).author(&name, &email);
        commit.message = format!("synthetic commit {c}");
        if c > 0 {
            commit.parents = vec![c as usize - 1];
        }
        for (f, mut edits) in planned {
            if edits.is_empty() {
                continue;
            }
            edits.sort_by_key(|e| e.start);
            let old = &contents[f];
            let mut new = Vec::with_capacity(old.len());
            let mut cursor = 0;
            for edit in edits {
                new.extend_from_slice(&old[cursor..edit.start]);
                let old_len = (edit.end - edit.start) as u32;
                let old_start = if old_len > 0 { edit.start as u32 + 1 } else { edit.start as u32 };
                let at = new.len() as u32;
                let new_len = edit.lines.len() as u32;
                let new_start = if new_len > 0 { at + 1 } else { at };
                new.extend(edit.lines);
                cursor = edit.end;
                events.push(PlannedEvent {
                    commit_index: c,
                    file: file_path(f as u32),
                    op: edit.op,
                    old_range: [old_start, old_len],
                    new_range: [new_start, new_len],
                });
            }
            new.extend_from_slice(&old[cursor..]);
            let path = file_path(f as u32);
            if new.is_empty() {
                commit.changes.push(FileChange::Delete { path });
            } else {
                let content: String = new.iter().map(|l| format!("{l}\n")).collect();
                commit.changes.push(FileChange::Write { path, content });
            }
            contents[f] = new;
        }
        commits.push(commit);
    }
    Plan { commits, events }
}

/// A generated repository and its edit manifest.
#[derive(Debug, Clone)]
pub struct SynthRepo {
    pub repo_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
}

/// Build only the manifest and commit script, without touching disk. Commit
/// ids in the returned manifest are placeholders.
pub fn plan_manifest(spec: &SynthSpec) -> Result<(Manifest, Vec<ScriptedCommit>), SynthError> {
    spec.validate()?;
    let plan = plan(spec);
    let zero = CommitId::new("0".repeat(40)).expect("valid id");
    let manifest = build_manifest(spec, &plan, &vec![zero; plan.commits.len()]);
    Ok((manifest, plan.commits))
}

fn build_manifest(spec: &SynthSpec, plan: &Plan, shas: &[CommitId]) -> Manifest {
    let events = plan
        .events
        .iter()
        .map(|e| {
            let commit = &plan.commits[e.commit_index as usize];
            ManifestEvent {
                commit_index: e.commit_index,
                sha: shas[e.commit_index as usize].clone(),
                ts: commit.ts,
                author: commit.author_email.to_lowercase(),
                file: e.file.clone(),
                op: e.op,
                old_range: e.old_range,
                new_range: e.new_range,
            }
        })
        .collect();
    Manifest {
        header: ManifestHeader {
            schema_version: MANIFEST_SCHEMA_VERSION,
            spec: spec.clone(),
        },
        events,
    }
}

/// Generate a repository at `out_path/repo.git` and its manifest at
/// `out_path/manifest.jsonl`. `out_path` must be absent or empty.
pub fn generate(spec: &SynthSpec, out_path: &Path) -> Result<SynthRepo, SynthError> {
    spec.validate()?;
    if out_path.exists() {
        let mut entries = fs::read_dir(out_path)?;
        if entries.next().is_some() {
            return Err(SynthError::PathNotEmpty(out_path.to_path_buf()));
        }
    }
    let existed = out_path.exists();
    fs::create_dir_all(out_path)?;
    let written = write_outputs(spec, out_path);
    if written.is_err() {
        // Leave the location as it was found.
        let _ = fs::remove_dir_all(out_path.join(REPO_DIR));
        let _ = fs::remove_file(out_path.join(MANIFEST_FILE));
        if !existed {
            let _ = fs::remove_dir(out_path);
        }
    }
    written
}

fn write_outputs(spec: &SynthSpec, out_path: &Path) -> Result<SynthRepo, SynthError> {
    let plan = plan(spec);
    let repo_path = out_path.join(REPO_DIR);
    let shas = script::write_history(&repo_path, &plan.commits)?;
    let manifest = build_manifest(spec, &plan, &shas);
    let manifest_path = out_path.join(MANIFEST_FILE);
    manifest.save(&manifest_path)?;
    Ok(SynthRepo {
        repo_path,
        manifest_path,
        manifest,
    })
}
