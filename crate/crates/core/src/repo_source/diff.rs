//! Parser for `git diff-tree -p -U0` output.

use super::{CommitDiff, DiffHunk, FileDiff, RepoError};

#[derive(Default)]
struct FileState {
    diff: FileDiff,
    binary: bool,
    submodule: bool,
    rename_from: Option<String>,
    rename_to: Option<String>,
}

impl FileState {
    fn finish(self, out: &mut CommitDiff) {
        if self.submodule {
            out.submodules_skipped += 1;
            return;
        }
        if self.binary {
            out.binary_files_skipped += 1;
            return;
        }
        let mut diff = self.diff;
        if diff.old_path.is_none() && diff.new_path.is_none() {
            diff.old_path = self.rename_from;
            diff.new_path = self.rename_to;
        }
        // Mode-only changes carry nothing; pure renames are kept.
        if !diff.hunks.is_empty() || diff.is_rename() {
            out.files.push(diff);
        }
    }
}

/// Split on `\n`, keeping content lines as raw bytes.
fn lines(raw: &[u8]) -> impl Iterator<Item = &[u8]> {
    let trimmed = raw.strip_suffix(b"\n").unwrap_or(raw);
    trimmed.split(|&b| b == b'\n').filter(move |_| !raw.is_empty())
}

pub fn parse_unified_diff(raw: &[u8]) -> Result<CommitDiff, RepoError> {
    let mut out = CommitDiff::default();
    let mut current: Option<FileState> = None;
    let mut it = lines(raw);

    while let Some(line) = it.next() {
        if line.starts_with(b"diff --git ") {
            if let Some(state) = current.take() {
                state.finish(&mut out);
            }
            current = Some(FileState::default());
            continue;
        }
        let Some(state) = current.as_mut() else {
            // diff-tree prints the commit id first when given a single commit
            continue;
        };
        let text = String::from_utf8_lossy(line);

        if let Some(rest) = text.strip_prefix("@@ ") {
            let hunk = parse_hunk_header(rest)?;
            // Skip exactly the body lines the header announces, so content
            // lines that look like headers are never misread.
            let mut old_left = hunk.old_len;
            let mut new_left = hunk.new_len;
            while old_left > 0 || new_left > 0 {
                let body = it
                    .next()
                    .ok_or_else(|| RepoError::Parse("truncated hunk body".into()))?;
                match body.first() {
                    Some(b'-') if old_left > 0 => old_left -= 1,
                    Some(b'+') if new_left > 0 => new_left -= 1,
                    Some(b'\\') => {}
                    _ => {
                        return Err(RepoError::Parse(format!(
                            "unexpected hunk body line {:?}",
                            String::from_utf8_lossy(body)
                        )))
                    }
                }
            }
            state.diff.hunks.push(hunk);
        } else if let Some(path) = text.strip_prefix("--- ") {
            state.diff.old_path = parse_side_path(path, "a/");
        } else if let Some(path) = text.strip_prefix("+++ ") {
            state.diff.new_path = parse_side_path(path, "b/");
        } else if let Some(path) = text.strip_prefix("rename from ") {
            state.rename_from = Some(unquote(path));
        } else if let Some(path) = text.strip_prefix("rename to ") {
            state.rename_to = Some(unquote(path));
        } else if text.starts_with("Binary files ") && text.ends_with(" differ") {
            state.binary = true;
        } else if text.starts_with("Subproject commit ") || is_gitlink_header(&text) {
            state.submodule = true;
        }
    }
    if let Some(state) = current.take() {
        state.finish(&mut out);
    }
    Ok(out)
}

fn is_gitlink_header(line: &str) -> bool {
    let mode_line = ["new file mode ", "deleted file mode ", "old mode ", "new mode "]
        .iter()
        .any(|p| line.starts_with(p));
    (mode_line && line.ends_with("160000")) || (line.starts_with("index ") && line.ends_with(" 160000"))
}

fn parse_side_path(raw: &str, prefix: &str) -> Option<String> {
    // git appends a tab when the name contains spaces
    let raw = raw.strip_suffix('\t').unwrap_or(raw);
    if raw == "/dev/null" {
        return None;
    }
    let path = unquote(raw);
    Some(path.strip_prefix(prefix).map(str::to_string).unwrap_or(path))
}

/// Undo git's C-style path quoting (`"a\tb"`, octal escapes for raw bytes).
pub(super) fn unquote(raw: &str) -> String {
    let Some(inner) = raw.strip_prefix('"').and_then(|r| r.strip_suffix('"')) else {
        return raw.to_string();
    };
    let bytes = inner.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'\\' || i + 1 == bytes.len() {
            out.push(bytes[i]);
            i += 1;
            continue;
        }
        let esc = bytes[i + 1];
        i += 2;
        let decoded = match esc {
            b'a' => 0x07,
            b'b' => 0x08,
            b'f' => 0x0c,
            b'n' => b'\n',
            b'r' => b'\r',
            b't' => b'\t',
            b'v' => 0x0b,
            b'0'..=b'3' if i + 2 <= bytes.len() => {
                let digits = [esc, bytes[i], bytes[i + 1]];
                i += 2;
                digits.iter().fold(0u8, |acc, d| acc.wrapping_mul(8).wrapping_add(d - b'0'))
            }
            other => other,
        };
        out.push(decoded);
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// Parses the part after `@@ `: `-a[,b] +c[,d] @@ ...`.
fn parse_hunk_header(rest: &str) -> Result<DiffHunk, RepoError> {
    let bad = || RepoError::Parse(format!("hunk header: @@ {rest}"));
    let mut parts = rest.split_whitespace();
    let old = parts.next().and_then(|p| p.strip_prefix('-')).ok_or_else(bad)?;
    let new = parts.next().and_then(|p| p.strip_prefix('+')).ok_or_else(bad)?;
    let (old_start, old_len) = parse_range(old).ok_or_else(bad)?;
    let (new_start, new_len) = parse_range(new).ok_or_else(bad)?;
    if old_len + new_len == 0 {
        return Err(bad());
    }
    Ok(DiffHunk {
        old_start,
        old_len,
        new_start,
        new_len,
    })
}

fn parse_range(s: &str) -> Option<(u32, u32)> {
    match s.split_once(',') {
        Some((start, len)) => Some((start.parse().ok()?, len.parse().ok()?)),
        None => Some((s.parse().ok()?, 1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hunk(old_start: u32, old_len: u32, new_start: u32, new_len: u32) -> DiffHunk {
        DiffHunk {
            old_start,
            old_len,
            new_start,
            new_len,
        }
    }

    #[test]
    fn root_addition() {
        let raw = b"abc\ndiff --git a/a.txt b/a.txt\nnew file mode 100644\nindex 0000000..f0f2307\n--- /dev/null\n+++ b/a.txt\n@@ -0,0 +1,3 @@\n+l1\n+l2\n+l3\n";
        let d = parse_unified_diff(raw).unwrap();
        assert_eq!(d.files.len(), 1);
        assert_eq!(d.files[0].old_path, None);
        assert_eq!(d.files[0].new_path.as_deref(), Some("a.txt"));
        assert_eq!(d.files[0].hunks, vec![hunk(0, 0, 1, 3)]);
    }

    #[test]
    fn single_line_substitution_and_deletion() {
        let raw = b"diff --git a/a.txt b/a.txt\nindex 1..2 100644\n--- a/a.txt\n+++ b/a.txt\n@@ -2 +2 @@ l1\n-l2\n+L2\n@@ -5,2 +4,0 @@\n--- not a header\n-+++ nor this\n";
        let d = parse_unified_diff(raw).unwrap();
        assert_eq!(d.files[0].hunks, vec![hunk(2, 1, 2, 1), hunk(5, 2, 4, 0)]);
    }

    #[test]
    fn full_deletion() {
        let raw = b"diff --git a/a.txt b/a.txt\ndeleted file mode 100644\nindex f0f2307..0000000\n--- a/a.txt\n+++ /dev/null\n@@ -1,3 +0,0 @@\n-l1\n-l2\n-l3\n";
        let d = parse_unified_diff(raw).unwrap();
        assert_eq!(d.files[0].new_path, None);
        assert_eq!(d.files[0].hunks, vec![hunk(1, 3, 0, 0)]);
    }

    #[test]
    fn binary_and_submodule_are_counted_not_returned() {
        let raw = b"diff --git a/img.png b/img.png\nnew file mode 100644\nindex 0000000..abc\nBinary files /dev/null and b/img.png differ\ndiff --git a/sub b/sub\nnew file mode 160000\nindex 0000000..1234567\n--- /dev/null\n+++ b/sub\n@@ -0,0 +1 @@\n+Subproject commit 1234567890123456789012345678901234567890\n";
        let d = parse_unified_diff(raw).unwrap();
        assert!(d.files.is_empty());
        assert_eq!(d.binary_files_skipped, 1);
        assert_eq!(d.submodules_skipped, 1);
    }

    #[test]
    fn rename_with_edit() {
        let raw = b"diff --git a/old.txt b/new.txt\nsimilarity index 80%\nrename from old.txt\nrename to new.txt\nindex 1..2 100644\n--- a/old.txt\n+++ b/new.txt\n@@ -3 +3 @@\n-x\n+y\n";
        let d = parse_unified_diff(raw).unwrap();
        assert!(d.files[0].is_rename());
        assert_eq!(d.files[0].old_path.as_deref(), Some("old.txt"));
        assert_eq!(d.files[0].new_path.as_deref(), Some("new.txt"));
    }

    #[test]
    fn quoted_paths() {
        assert_eq!(unquote("\"a\\tb\""), "a\tb");
        assert_eq!(unquote("\"caf\\303\\251\""), "café");
        assert_eq!(unquote("plain name"), "plain name");
        assert_eq!(parse_side_path("b/with space.txt\t", "b/").as_deref(), Some("with space.txt"));
    }

    #[test]
    fn empty_output() {
        assert_eq!(parse_unified_diff(b"").unwrap(), CommitDiff::default());
    }

    #[test]
    fn malformed_header_is_an_error() {
        let raw = b"diff --git a/a b/a\n--- a/a\n+++ b/a\n@@ -x +1 @@\n";
        assert!(parse_unified_diff(raw).is_err());
    }
}
