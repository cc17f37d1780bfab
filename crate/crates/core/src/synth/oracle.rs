//! Reference TTM computation that works purely from a manifest, with no git
//! involved. Each file is tracked as a vector holding the owning hunk of
//! every line, which is simple enough to trust by inspection.

use std::collections::HashMap;

use super::{Manifest, ManifestEvent, SynthError};
use crate::engine::TtmRecord;
use crate::hunk_index::{sort_records, HunkKey, HunkRecord, ModState};
use crate::repo_source::CommitId;

/// Expected per-hunk records for a linear synthetic history, sorted like the
/// engine's output.
pub fn oracle_ttm(manifest: &Manifest) -> Result<Vec<TtmRecord>, SynthError> {
    let commits = group_commits(&manifest.events)?;

    let mut hunks: Vec<HunkRecord> = Vec::new();
    let mut files: HashMap<String, Vec<usize>> = HashMap::new();

    for events in commits {
        let head = events[0];
        let mut by_file: Vec<(&str, Vec<&ManifestEvent>)> = Vec::new();
        for e in &events {
            match by_file.iter_mut().find(|(f, _)| *f == e.file) {
                Some((_, list)) => list.push(e),
                None => by_file.push((&e.file, vec![e])),
            }
        }

        for (file, mut edits) in by_file {
            edits.sort_by_key(|e| old_span(e).0);
            let old = files.remove(file).unwrap_or_default();
            let mut new: Vec<usize> = Vec::with_capacity(old.len());
            let mut cursor = 0usize;

            for e in edits {
                let (start, end) = old_span(e);
                if start < cursor || end > old.len() {
                    return Err(SynthError::InconsistentManifest(format!(
                        "commit {} edit {:?} on {file} does not fit a {}-line file",
                        e.commit_index,
                        e.old_range,
                        old.len()
                    )));
                }
                new.extend_from_slice(&old[cursor..start]);
                for &owner in &old[start..end] {
                    let rec = &mut hunks[owner];
                    if rec.state == ModState::Unmodified {
                        rec.state = ModState::Modified {
                            first_mod_sha: head.sha.clone(),
                            first_mod_ts: head.ts,
                        };
                    }
                }
                cursor = end;

                let [claimed_start, len] = e.new_range;
                if len == 0 {
                    if claimed_start as usize != new.len() {
                        return Err(mismatch(e, new.len()));
                    }
                    continue;
                }
                let new_start = new.len() as u32 + 1;
                if claimed_start != new_start {
                    return Err(mismatch(e, new_start as usize));
                }
                let id = hunks.len();
                hunks.push(HunkRecord::new(
                    HunkKey::new(head.sha.clone(), file, new_start, new_start + len - 1),
                    head.ts,
                    e.author.clone(),
                ));
                new.extend(std::iter::repeat_n(id, len as usize));
            }
            new.extend_from_slice(&old[cursor..]);
            if !new.is_empty() {
                files.insert(file.to_string(), new);
            }
        }
    }

    sort_records(&mut hunks);
    Ok(hunks.into_iter().map(TtmRecord::from_hunk).collect())
}

/// 0-based half-open span of old lines an event removes.
fn old_span(e: &ManifestEvent) -> (usize, usize) {
    let [start, len] = e.old_range;
    if len == 0 {
        (start as usize, start as usize)
    } else {
        let s = start as usize - 1;
        (s, s + len as usize)
    }
}

fn mismatch(e: &ManifestEvent, expected: usize) -> SynthError {
    SynthError::InconsistentManifest(format!(
        "commit {} on {}: manifest says new start {}, replay gives {expected}",
        e.commit_index, e.file, e.new_range[0]
    ))
}

/// Split events into per-commit groups, checking the history is a simple
/// chain: indices never go backwards and each index has one id and time.
fn group_commits(events: &[ManifestEvent]) -> Result<Vec<Vec<&ManifestEvent>>, SynthError> {
    let mut groups: Vec<Vec<&ManifestEvent>> = Vec::new();
    let mut seen: HashMap<&CommitId, u32> = HashMap::new();
    for e in events {
        if e.old_range[1] > 0 && e.old_range[0] == 0 {
            return Err(SynthError::InconsistentManifest(format!(
                "commit {}: old range {:?} starts at line 0",
                e.commit_index, e.old_range
            )));
        }
        match groups.last_mut() {
            Some(g) if g[0].commit_index == e.commit_index => {
                if g[0].sha != e.sha || g[0].ts != e.ts {
                    return Err(SynthError::NonLinearHistory(format!(
                        "commit index {} has conflicting ids or times",
                        e.commit_index
                    )));
                }
                g.push(e);
            }
            Some(g) if g[0].commit_index > e.commit_index => {
                return Err(SynthError::NonLinearHistory(format!(
                    "commit index {} follows {}",
                    e.commit_index, g[0].commit_index
                )));
            }
            _ => groups.push(vec![e]),
        }
        if let Some(&prev) = seen.get(&e.sha) {
            if prev != e.commit_index {
                return Err(SynthError::NonLinearHistory(format!(
                    "{} appears at indices {prev} and {}",
                    e.sha, e.commit_index
                )));
            }
        }
        seen.insert(&e.sha, e.commit_index);
    }
    Ok(groups)
}
