//! Read-only access to a Git repository through the `git` executable.
//!
//! Three queries are exposed: chronological commit enumeration, zero-context
//! per-commit diffs split into hunks, and blame scoped to a line range at a
//! given commit. The repository is never written to.

mod blame;
mod diff;

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blame::parse_porcelain;
pub use diff::parse_unified_diff;

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("not a git repository: {0}")]
    RepoNotFound(PathBuf),
    #[error("branch or revision not found: {0}")]
    BranchNotFound(String),
    #[error("no commits in the selected range")]
    EmptyHistory,
    #[error("object missing or unreadable: {0}")]
    ObjectMissing(String),
    #[error("file {path} does not exist at {commit}")]
    FileNotAtCommit { commit: String, path: String },
    #[error("line range {start}+{len} is out of bounds for {path} at {commit}")]
    RangeOutOfBounds {
        commit: String,
        path: String,
        start: u32,
        len: u32,
    },
    #[error("malformed git output: {0}")]
    Parse(String),
    #[error("git {args} failed: {stderr}")]
    Git { args: String, stderr: String },
    #[error("failed to run git: {0}")]
    Io(#[from] std::io::Error),
}

/// A commit object id (hex SHA-1 or SHA-256).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommitId(String);

impl CommitId {
    pub fn new(hex: impl Into<String>) -> Result<Self, RepoError> {
        let hex = hex.into();
        let ok = matches!(hex.len(), 40 | 64) && hex.bytes().all(|b| b.is_ascii_hexdigit());
        if ok {
            Ok(Self(hex.to_ascii_lowercase()))
        } else {
            Err(RepoError::Parse(format!("not a commit id: {hex:?}")))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn short(&self) -> &str {
        &self.0[..8]
    }
}

impl fmt::Display for CommitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for CommitId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitMeta {
    pub sha: CommitId,
    pub parents: Vec<CommitId>,
    /// Committer timestamp, seconds since the Unix epoch (UTC).
    pub committer_ts: i64,
    pub author_id: String,
}

impl CommitMeta {
    pub fn is_root(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn is_merge(&self) -> bool {
        self.parents.len() > 1
    }
}

/// Lowercased email, or lowercased name when the email is empty.
pub fn normalize_author(name: &str, email: &str) -> String {
    let email = email.trim();
    if email.is_empty() {
        name.trim().to_lowercase()
    } else {
        email.to_lowercase()
    }
}

/// One zero-context hunk. `*_start` follow unified-diff header conventions:
/// for an empty side the start is the line *before* the change (0 at the top).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiffHunk {
    pub old_start: u32,
    pub old_len: u32,
    pub new_start: u32,
    pub new_len: u32,
}

/// Hunks for one file pair. `old_path` is `None` for added files and
/// `new_path` is `None` for deleted files.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FileDiff {
    pub old_path: Option<String>,
    pub new_path: Option<String>,
    pub hunks: Vec<DiffHunk>,
}

impl FileDiff {
    pub fn is_rename(&self) -> bool {
        matches!((&self.old_path, &self.new_path), (Some(a), Some(b)) if a != b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommitDiff {
    pub files: Vec<FileDiff>,
    pub binary_files_skipped: usize,
    pub submodules_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlameSpan {
    pub origin_sha: CommitId,
    pub origin_path: String,
    pub origin_start: u32,
    pub span_len: u32,
    pub query_start: u32,
}

/// A 1-based, non-empty line range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineRange {
    pub start: u32,
    pub len: u32,
}

impl LineRange {
    pub fn new(start: u32, len: u32) -> Self {
        Self { start, len }
    }

    /// One past the last line.
    pub fn end(&self) -> u32 {
        self.start + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeOptions {
    /// Branch or revision to walk; `None` means `HEAD`.
    pub branch: Option<String>,
    pub since_ts: Option<i64>,
    pub until_ts: Option<i64>,
    pub first_parent: bool,
}

impl Default for RangeOptions {
    fn default() -> Self {
        Self {
            branch: None,
            since_ts: None,
            until_ts: None,
            first_parent: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiffOptions {
    /// Rename similarity threshold in percent; `None` disables rename detection.
    pub rename_threshold: Option<u8>,
    /// Blame follows only first parents; matches a first-parent walk.
    pub blame_first_parent: bool,
}

impl Default for DiffOptions {
    fn default() -> Self {
        Self {
            rename_threshold: Some(50),
            blame_first_parent: true,
        }
    }
}

/// Handle on a repository directory (working tree or bare).
#[derive(Debug, Clone)]
pub struct GitRepo {
    path: PathBuf,
    options: DiffOptions,
}

impl GitRepo {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, RepoError> {
        let path = path.as_ref();
        let canonical = path
            .canonicalize()
            .map_err(|_| RepoError::RepoNotFound(path.to_path_buf()))?;
        let repo = Self {
            path: canonical,
            options: DiffOptions::default(),
        };
        let out = repo.run_raw(&["rev-parse", "--git-dir"])?;
        if !out.status.success() {
            return Err(RepoError::RepoNotFound(path.to_path_buf()));
        }
        Ok(repo)
    }

    pub fn with_options(mut self, options: DiffOptions) -> Self {
        self.options = options;
        self
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn options(&self) -> DiffOptions {
        self.options
    }

    fn command(&self) -> Command {
        git_command(&self.path)
    }

    fn run_raw<S: AsRef<std::ffi::OsStr>>(&self, args: &[S]) -> Result<Output, RepoError> {
        Ok(self.command().args(args).output()?)
    }

    fn run<S: AsRef<std::ffi::OsStr>>(&self, args: &[S]) -> Result<Vec<u8>, RepoError> {
        let out = self.run_raw(args)?;
        if out.status.success() {
            Ok(out.stdout)
        } else {
            Err(git_failure(args, &out))
        }
    }

    fn resolve(&self, rev: &str) -> Result<Option<CommitId>, RepoError> {
        let spec = format!("{rev}^{{commit}}");
        let out = self.run_raw(&["rev-parse", "--verify", "--quiet", spec.as_str()])?;
        if !out.status.success() {
            return Ok(None);
        }
        let text = String::from_utf8_lossy(&out.stdout);
        CommitId::new(text.trim()).map(Some)
    }

    /// A stable identifier for this repository: its canonical path.
    pub fn identifier(&self) -> String {
        self.path.to_string_lossy().into_owned()
    }

    /// Commits oldest to newest. Parents always precede children; ties among
    /// ready commits are broken by committer timestamp, then by id.
    pub fn list_commits(&self, opts: &RangeOptions) -> Result<Vec<CommitMeta>, RepoError> {
        let tip = match &opts.branch {
            Some(branch) => self
                .resolve(branch)?
                .ok_or_else(|| RepoError::BranchNotFound(branch.clone()))?,
            None => self.resolve("HEAD")?.ok_or(RepoError::EmptyHistory)?,
        };

        let mut args = vec![
            "log".to_string(),
            "--no-color".into(),
            "--format=%H%x00%P%x00%ct%x00%ae%x00%an".into(),
        ];
        if opts.first_parent {
            args.push("--first-parent".into());
        }
        args.push(tip.to_string());
        let raw = self.run(&args)?;
        let text = String::from_utf8_lossy(&raw);

        let mut commits = Vec::new();
        for line in text.lines().filter(|l| !l.is_empty()) {
            let fields: Vec<&str> = line.split('\0').collect();
            if fields.len() != 5 {
                return Err(RepoError::Parse(format!("log record: {line:?}")));
            }
            let parents = fields[1]
                .split_whitespace()
                .map(CommitId::new)
                .collect::<Result<Vec<_>, _>>()?;
            let committer_ts = fields[2]
                .parse()
                .map_err(|_| RepoError::Parse(format!("timestamp {:?}", fields[2])))?;
            commits.push(CommitMeta {
                sha: CommitId::new(fields[0])?,
                parents,
                committer_ts,
                author_id: normalize_author(fields[4], fields[3]),
            });
        }

        let ordered = topo_order(commits, opts.first_parent);
        let in_range: Vec<CommitMeta> = ordered
            .into_iter()
            .filter(|c| opts.since_ts.is_none_or(|s| c.committer_ts >= s))
            .filter(|c| opts.until_ts.is_none_or(|u| c.committer_ts <= u))
            .collect();
        if in_range.is_empty() {
            return Err(RepoError::EmptyHistory);
        }
        Ok(in_range)
    }

    /// Zero-context diff of `commit` against `parents[parent_selector]`, or
    /// against the empty tree for a root commit.
    pub fn diff_commit(
        &self,
        commit: &CommitMeta,
        parent_selector: usize,
    ) -> Result<CommitDiff, RepoError> {
        let mut args: Vec<String> = [
            "diff-tree",
            "-r",
            "-p",
            "-U0",
            "--no-color",
            "--no-ext-diff",
            "--no-textconv",
            "--src-prefix=a/",
            "--dst-prefix=b/",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        match self.options.rename_threshold {
            Some(pct) => args.push(format!("-M{pct}%")),
            None => args.push("--no-renames".into()),
        }
        if commit.is_root() {
            args.push("--root".into());
            args.push(commit.sha.to_string());
        } else {
            let parent = commit.parents.get(parent_selector).ok_or_else(|| {
                RepoError::ObjectMissing(format!(
                    "{} has no parent #{parent_selector}",
                    commit.sha
                ))
            })?;
            args.push(parent.to_string());
            args.push(commit.sha.to_string());
        }
        let out = self.run_raw(&args)?;
        if !out.status.success() {
            return Err(RepoError::ObjectMissing(format!(
                "{}: {}",
                commit.sha,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        parse_unified_diff(&out.stdout)
    }

    pub fn blame_range(
        &self,
        commit: &CommitId,
        path: &str,
        start: u32,
        len: u32,
    ) -> Result<Vec<BlameSpan>, RepoError> {
        let mut per_range = self.blame_ranges(commit, path, &[LineRange::new(start, len)])?;
        Ok(per_range.pop().unwrap_or_default())
    }

    /// Blame several disjoint ranges of one file in a single pass. The result
    /// has one span list per input range, in input order; each list tiles its
    /// range exactly.
    pub fn blame_ranges(
        &self,
        commit: &CommitId,
        path: &str,
        ranges: &[LineRange],
    ) -> Result<Vec<Vec<BlameSpan>>, RepoError> {
        if ranges.is_empty() {
            return Ok(Vec::new());
        }
        let out_of_bounds = |r: &LineRange| RepoError::RangeOutOfBounds {
            commit: commit.to_string(),
            path: path.to_string(),
            start: r.start,
            len: r.len,
        };
        if let Some(bad) = ranges.iter().find(|r| r.start < 1 || r.len < 1) {
            return Err(out_of_bounds(bad));
        }

        let mut args = vec!["blame".to_string(), "--porcelain".into()];
        if self.options.blame_first_parent {
            args.push("--first-parent".into());
        }
        for r in ranges {
            args.push("-L".into());
            args.push(format!("{},{}", r.start, r.end() - 1));
        }
        args.push(commit.to_string());
        args.push("--".into());
        args.push(path.to_string());

        let out = self.run_raw(&args)?;
        if !out.status.success() {
            let stderr = String::from_utf8_lossy(&out.stderr);
            if stderr.contains("no such path") {
                return Err(RepoError::FileNotAtCommit {
                    commit: commit.to_string(),
                    path: path.to_string(),
                });
            }
            if stderr.contains("has only") || stderr.contains("invalid -L") {
                return Err(out_of_bounds(&ranges[0]));
            }
            return Err(git_failure(&args, &out));
        }

        let groups = parse_porcelain(&out.stdout)?;
        let mut result = Vec::with_capacity(ranges.len());
        for r in ranges {
            let spans = blame::clip_groups(&groups, *r);
            let covered: u32 = spans.iter().map(|s| s.span_len).sum();
            if covered != r.len {
                return Err(out_of_bounds(r));
            }
            result.push(spans);
        }
        Ok(result)
    }

    /// Contents of `path` at `commit` split into lines (without terminators).
    pub fn file_lines(&self, commit: &CommitId, path: &str) -> Result<Vec<String>, RepoError> {
        let spec = format!("{commit}:{path}");
        let out = self.run_raw(&["cat-file", "blob", spec.as_str()])?;
        if !out.status.success() {
            return Err(RepoError::FileNotAtCommit {
                commit: commit.to_string(),
                path: path.to_string(),
            });
        }
        Ok(String::from_utf8_lossy(&out.stdout)
            .lines()
            .map(str::to_string)
            .collect())
    }
}

/// `git -C dir` isolated from user and system configuration, so output
/// formats and diff behavior do not depend on the caller's environment.
pub(crate) fn git_command(dir: &Path) -> Command {
    let mut cmd = Command::new("git");
    cmd.arg("-C")
        .arg(dir)
        .args(["-c", "core.quotePath=false", "-c", "safe.directory=*"])
        .env("LC_ALL", "C")
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("GIT_CONFIG_GLOBAL", "/dev/null")
        .env("GIT_TERMINAL_PROMPT", "0")
        .env_remove("GIT_DIR")
        .env_remove("GIT_WORK_TREE")
        .env_remove("GIT_INDEX_FILE");
    cmd
}

fn git_failure<S: AsRef<std::ffi::OsStr>>(args: &[S], out: &Output) -> RepoError {
    let args = args
        .iter()
        .map(|a| a.as_ref().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    RepoError::Git {
        args,
        stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
    }
}

/// Kahn's algorithm over parent->child edges inside the set, always emitting
/// the ready commit with the smallest (timestamp, id).
fn topo_order(commits: Vec<CommitMeta>, first_parent: bool) -> Vec<CommitMeta> {
    let index: HashMap<CommitId, usize> = commits
        .iter()
        .enumerate()
        .map(|(i, c)| (c.sha.clone(), i))
        .collect();
    let mut pending = vec![0usize; commits.len()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); commits.len()];
    for (i, c) in commits.iter().enumerate() {
        let parents = if first_parent {
            &c.parents[..c.parents.len().min(1)]
        } else {
            &c.parents[..]
        };
        // A parent listed twice still counts once.
        let distinct: BTreeSet<&CommitId> = parents.iter().collect();
        for p in distinct {
            if let Some(&pi) = index.get(p) {
                pending[i] += 1;
                children[pi].push(i);
            }
        }
    }

    let mut ready: BinaryHeap<Reverse<(i64, CommitId, usize)>> = commits
        .iter()
        .enumerate()
        .filter(|(i, _)| pending[*i] == 0)
        .map(|(i, c)| Reverse((c.committer_ts, c.sha.clone(), i)))
        .collect();
    let mut order = Vec::with_capacity(commits.len());
    while let Some(Reverse((_, _, i))) = ready.pop() {
        order.push(i);
        for &child in &children[i] {
            pending[child] -= 1;
            if pending[child] == 0 {
                let c = &commits[child];
                ready.push(Reverse((c.committer_ts, c.sha.clone(), child)));
            }
        }
    }

    let mut slots: BTreeMap<usize, CommitMeta> = commits.into_iter().enumerate().collect();
    order
        .into_iter()
        .filter_map(|i| slots.remove(&i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: u8) -> CommitId {
        CommitId::new(format!("{:040x}", n)).unwrap()
    }

    fn meta(n: u8, parents: &[u8], ts: i64) -> CommitMeta {
        CommitMeta {
            sha: id(n),
            parents: parents.iter().map(|&p| id(p)).collect(),
            committer_ts: ts,
            author_id: "a@x".into(),
        }
    }

    #[test]
    fn commit_id_validation() {
        assert!(CommitId::new("abc").is_err());
        assert!(CommitId::new("z".repeat(40)).is_err());
        let upper = CommitId::new("A".repeat(40)).unwrap();
        assert_eq!(upper.as_str(), "a".repeat(40));
    }

    #[test]
    fn author_normalization() {
        assert_eq!(normalize_author("Jane", "Jane@Example.COM"), "jane@example.com");
        assert_eq!(normalize_author("Jane Doe", ""), "jane doe");
    }

    #[test]
    fn topo_order_keeps_parent_before_child_with_skewed_clock() {
        // child 2 is older than its parent 1
        let commits = vec![meta(2, &[1], 5), meta(1, &[], 50), meta(3, &[2], 60)];
        let order: Vec<_> = topo_order(commits, true).into_iter().map(|c| c.sha).collect();
        assert_eq!(order, vec![id(1), id(2), id(3)]);
    }

    #[test]
    fn topo_order_breaks_ties_by_timestamp() {
        // two branches off root merged by 4
        let commits = vec![
            meta(4, &[2, 3], 40),
            meta(3, &[1], 20),
            meta(2, &[1], 30),
            meta(1, &[], 10),
        ];
        let order: Vec<_> = topo_order(commits, false).into_iter().map(|c| c.sha).collect();
        assert_eq!(order, vec![id(1), id(3), id(2), id(4)]);
    }
}
