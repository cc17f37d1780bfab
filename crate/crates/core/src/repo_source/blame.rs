//! Parser for `git blame --porcelain`.

use std::collections::HashMap;

use super::{BlameSpan, CommitId, LineRange, RepoError};

/// A run of consecutive final lines attributed to one origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlameGroup {
    pub origin_sha: CommitId,
    pub origin_path: String,
    pub origin_start: u32,
    pub final_start: u32,
    pub len: u32,
}

fn is_oid(token: &str) -> bool {
    matches!(token.len(), 40 | 64) && token.bytes().all(|b| b.is_ascii_hexdigit())
}

/// Porcelain prints `filename` only the first time a commit appears (unless
/// the commit is seen under several paths), so the last filename per commit
/// is carried forward.
pub fn parse_porcelain(raw: &[u8]) -> Result<Vec<BlameGroup>, RepoError> {
    let text = String::from_utf8_lossy(raw);
    let mut groups: Vec<(BlameGroup, bool)> = Vec::new();
    let mut last_path: HashMap<CommitId, String> = HashMap::new();

    let close = |groups: &mut Vec<(BlameGroup, bool)>, last_path: &HashMap<CommitId, String>| {
        if let Some((g, named)) = groups.last_mut() {
            if !*named {
                if let Some(p) = last_path.get(&g.origin_sha) {
                    g.origin_path = p.clone();
                    *named = true;
                }
            }
        }
    };

    for line in text.lines() {
        if line.starts_with('\t') {
            continue;
        }
        let tokens: Vec<&str> = line.split(' ').collect();
        if (tokens.len() == 3 || tokens.len() == 4) && is_oid(tokens[0]) {
            if tokens.len() == 3 {
                continue;
            }
            close(&mut groups, &last_path);
            let num = |s: &str| {
                s.parse::<u32>()
                    .map_err(|_| RepoError::Parse(format!("blame header {line:?}")))
            };
            groups.push((
                BlameGroup {
                    origin_sha: CommitId::new(tokens[0])?,
                    origin_path: String::new(),
                    origin_start: num(tokens[1])?,
                    final_start: num(tokens[2])?,
                    len: num(tokens[3])?,
                },
                false,
            ));
        } else if let Some(name) = line.strip_prefix("filename ") {
            let (g, named) = groups
                .last_mut()
                .ok_or_else(|| RepoError::Parse("filename before header".into()))?;
            let name = super::diff::unquote(name);
            last_path.insert(g.origin_sha.clone(), name.clone());
            g.origin_path = name;
            *named = true;
        }
    }
    close(&mut groups, &last_path);

    let mut out = Vec::with_capacity(groups.len());
    for (g, named) in groups {
        if !named {
            return Err(RepoError::Parse(format!(
                "no filename for blame group of {}",
                g.origin_sha
            )));
        }
        out.push(g);
    }
    out.sort_by_key(|g| g.final_start);
    Ok(out)
}

/// Intersect blame groups with one query range, producing spans in query order.
pub fn clip_groups(groups: &[BlameGroup], range: LineRange) -> Vec<BlameSpan> {
    let mut spans = Vec::new();
    for g in groups {
        let lo = g.final_start.max(range.start);
        let hi = (g.final_start + g.len).min(range.end());
        if lo >= hi {
            continue;
        }
        spans.push(BlameSpan {
            origin_sha: g.origin_sha.clone(),
            origin_path: g.origin_path.clone(),
            origin_start: g.origin_start + (lo - g.final_start),
            span_len: hi - lo,
            query_start: lo,
        });
    }
    spans
}
