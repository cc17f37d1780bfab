//! Scripted history writer: builds a bare repository from an explicit list
//! of commits through `git fast-import`, with every identity and timestamp
//! pinned so commit ids are reproducible.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Stdio;

use super::SynthError;
use crate::repo_source::{git_command, CommitId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FileChange {
    Write { path: String, content: String },
    Delete { path: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptedCommit {
    pub branch: String,
    pub author_name: String,
    pub author_email: String,
    pub ts: i64,
    pub message: String,
    /// Indices of earlier commits in the script; empty for a root commit.
    pub parents: Vec<usize>,
    pub changes: Vec<FileChange>,
}

impl ScriptedCommit {
    pub fn new(ts: i64) -> Self {
        Self {
            branch: "main".into(),
            author_name: "Test Author".into(),
            author_email: "author@example.test".into(),
            ts,
            message: String::new(),
            parents: Vec::new(),
            changes: Vec::new(),
        }
    }

    pub fn author(mut self, name: &str, email: &str) -> Self {
        self.author_name = name.into();
        self.author_email = email.into();
        self
    }

    pub fn parents(mut self, parents: &[usize]) -> Self {
        self.parents = parents.to_vec();
        self
    }

    pub fn branch(mut self, branch: &str) -> Self {
        self.branch = branch.into();
        self
    }

    pub fn message(mut self, message: &str) -> Self {
        self.message = message.into();
        self
    }

    /// Set the full content of `path`.
    pub fn write(mut self, path: &str, content: &str) -> Self {
        self.changes.push(FileChange::Write {
            path: path.into(),
            content: content.into(),
        });
        self
    }

    /// Set `path` to the given lines, each terminated by a newline.
    pub fn lines(self, path: &str, lines: &[&str]) -> Self {
        let content: String = lines.iter().map(|l| format!("{l}\n")).collect();
        self.write(path, &content)
    }

    pub fn delete(mut self, path: &str) -> Self {
        self.changes.push(FileChange::Delete { path: path.into() });
        self
    }
}

/// Build a linear script: each commit's parent is the one before it.
pub fn linear(commits: Vec<ScriptedCommit>) -> Vec<ScriptedCommit> {
    commits
        .into_iter()
        .enumerate()
        .map(|(i, c)| if i == 0 { c } else { c.parents(&[i - 1]) })
        .collect()
}

fn check_path(path: &str) -> Result<(), SynthError> {
    if path.is_empty() || path.contains('\n') || path.starts_with('"') || path.starts_with('/') {
        return Err(SynthError::InvalidSpec(format!("unsupported path {path:?}")));
    }
    Ok(())
}

fn stream(commits: &[ScriptedCommit]) -> Result<Vec<u8>, SynthError> {
    let mut out = Vec::new();
    for (i, c) in commits.iter().enumerate() {
        if c.ts < 0 {
            return Err(SynthError::InvalidSpec(format!("commit {i} has negative timestamp")));
        }
        if let Some(&bad) = c.parents.iter().find(|&&p| p >= i) {
            return Err(SynthError::InvalidSpec(format!(
                "commit {i} names parent {bad}, which is not earlier in the script"
            )));
        }
        let who = format!("{} <{}> {} +0000", c.author_name, c.author_email, c.ts);
        let message = if c.message.is_empty() {
            format!("commit {i}\n")
        } else {
            format!("{}\n", c.message)
        };
        if c.parents.is_empty() {
            writeln!(out, "reset refs/heads/{}", c.branch)?;
        }
        write!(
            out,
            "commit refs/heads/{}\nmark :{}\nauthor {who}\ncommitter {who}\ndata {}\n{message}",
            c.branch,
            i + 1,
            message.len()
        )?;
        for (n, p) in c.parents.iter().enumerate() {
            let verb = if n == 0 { "from" } else { "merge" };
            writeln!(out, "{verb} :{}", p + 1)?;
        }
        for change in &c.changes {
            match change {
                FileChange::Write { path, content } => {
                    check_path(path)?;
                    write!(out, "M 100644 inline {path}\ndata {}\n", content.len())?;
                    out.extend_from_slice(content.as_bytes());
                    out.push(b'\n');
                }
                FileChange::Delete { path } => {
                    check_path(path)?;
                    writeln!(out, "D {path}")?;
                }
            }
        }
        out.push(b'\n');
    }
    Ok(out)
}

/// Write `commits` into a new bare repository at `repo_dir`, returning the
/// commit id of each script entry. `HEAD` points at the branch of the last
/// commit.
pub fn write_history(repo_dir: &Path, commits: &[ScriptedCommit]) -> Result<Vec<CommitId>, SynthError> {
    let last = commits
        .last()
        .ok_or_else(|| SynthError::InvalidSpec("empty script".into()))?;
    let data = stream(commits)?;

    fs::create_dir_all(repo_dir)?;
    let repo_dir = &std::path::absolute(repo_dir)?;
    let parent = repo_dir.parent().unwrap_or(Path::new("/"));
    let status = git_command(parent)
        .args(["init", "-q", "--bare"])
        .arg(repo_dir)
        .stdout(Stdio::null())
        .status()?;
    if !status.success() {
        return Err(SynthError::GitWriteFailure("git init failed".into()));
    }

    let marks = tempfile::NamedTempFile::new()?;
    let mut child = git_command(repo_dir)
        .arg("fast-import")
        .arg("--quiet")
        .arg(format!("--export-marks={}", marks.path().display()))
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()?;
    child
        .stdin
        .take()
        .expect("stdin is piped")
        .write_all(&data)?;
    let output = child.wait_with_output()?;
    if !output.status.success() {
        return Err(SynthError::GitWriteFailure(
            String::from_utf8_lossy(&output.stderr).trim().to_string(),
        ));
    }

    let head = format!("refs/heads/{}", last.branch);
    let status = git_command(repo_dir)
        .args(["symbolic-ref", "HEAD", head.as_str()])
        .status()?;
    if !status.success() {
        return Err(SynthError::GitWriteFailure("cannot point HEAD at branch".into()));
    }

    let mut by_mark = BTreeMap::new();
    for line in fs::read_to_string(marks.path())?.lines() {
        let (mark, sha) = line
            .split_once(' ')
            .ok_or_else(|| SynthError::GitWriteFailure(format!("bad marks line {line:?}")))?;
        let n: usize = mark
            .trim_start_matches(':')
            .parse()
            .map_err(|_| SynthError::GitWriteFailure(format!("bad mark {mark:?}")))?;
        let id = CommitId::new(sha).map_err(|e| SynthError::GitWriteFailure(e.to_string()))?;
        by_mark.insert(n, id);
    }
    (1..=commits.len())
        .map(|n| {
            by_mark
                .remove(&n)
                .ok_or_else(|| SynthError::GitWriteFailure(format!("no id for commit {}", n - 1)))
        })
        .collect()
}
