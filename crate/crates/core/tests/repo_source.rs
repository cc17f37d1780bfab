use tempfile::TempDir;
use ttm_core::repo_source::{
    CommitId, DiffHunk, DiffOptions, GitRepo, LineRange, RangeOptions, RepoError,
};
use ttm_core::synth::script::{linear, write_history, ScriptedCommit};

fn build(commits: Vec<ScriptedCommit>) -> (TempDir, GitRepo, Vec<CommitId>) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("repo.git");
    let shas = write_history(&path, &commits).unwrap();
    let repo = GitRepo::open(&path).unwrap();
    (dir, repo, shas)
}

fn hunk(old_start: u32, old_len: u32, new_start: u32, new_len: u32) -> DiffHunk {
    DiffHunk {
        old_start,
        old_len,
        new_start,
        new_len,
    }
}

#[test]
fn blame_attributes_lines_to_their_origin() {
    let (_d, repo, shas) = build(linear(vec![
        ScriptedCommit::new(1000).lines("f.txt", &["a", "b", "c"]),
        ScriptedCommit::new(1100).lines("f.txt", &["a", "B", "c"]),
    ]));
    let spans = repo.blame_range(&shas[1], "f.txt", 1, 3).unwrap();
    let owners: Vec<(&str, u32, u32)> = spans
        .iter()
        .map(|s| (s.origin_sha.as_str(), s.origin_start, s.span_len))
        .collect();
    assert_eq!(
        owners,
        vec![
            (shas[0].as_str(), 1, 1),
            (shas[1].as_str(), 2, 1),
            (shas[0].as_str(), 3, 1),
        ]
    );

    let before = repo.blame_range(&shas[0], "f.txt", 2, 1).unwrap();
    assert_eq!(before.len(), 1);
    assert_eq!(before[0].origin_sha, shas[0]);
    assert_eq!(before[0].origin_start, 2);
}

#[test]
fn batched_blame_keeps_input_order() {
    let (_d, repo, shas) = build(linear(vec![
        ScriptedCommit::new(10).lines("f", &["1", "2", "3", "4", "5"]),
        ScriptedCommit::new(20).lines("f", &["0", "1", "2", "3", "4", "5"]),
    ]));
    let got = repo
        .blame_ranges(&shas[1], "f", &[LineRange::new(5, 2), LineRange::new(1, 1)])
        .unwrap();
    assert_eq!(got.len(), 2);
    assert_eq!(got[0].len(), 1);
    assert_eq!((got[0][0].origin_start, got[0][0].span_len), (4, 2));
    assert_eq!(got[0][0].query_start, 5);
    assert_eq!(got[1][0].origin_sha, shas[1]);
}

#[test]
fn blame_errors() {
    let (_d, repo, shas) = build(vec![ScriptedCommit::new(10).lines("f", &["x", "y"])]);
    assert!(matches!(
        repo.blame_range(&shas[0], "missing", 1, 1),
        Err(RepoError::FileNotAtCommit { .. })
    ));
    assert!(matches!(
        repo.blame_range(&shas[0], "f", 2, 5),
        Err(RepoError::RangeOutOfBounds { .. })
    ));
    assert!(matches!(
        repo.blame_range(&shas[0], "f", 0, 1),
        Err(RepoError::RangeOutOfBounds { .. })
    ));
}

#[test]
fn diff_shapes() {
    let (_d, repo, _) = build(linear(vec![
        ScriptedCommit::new(10).lines("f", &["a", "b", "c", "d"]),
        // replace b, delete d
        ScriptedCommit::new(20).lines("f", &["a", "B", "c"]),
        // pure insertion after a
        ScriptedCommit::new(30).lines("f", &["a", "new1", "new2", "B", "c"]),
        ScriptedCommit::new(40).delete("f"),
    ]));
    let commits = repo.list_commits(&RangeOptions::default()).unwrap();
    assert_eq!(commits.len(), 4);

    let root = repo.diff_commit(&commits[0], 0).unwrap();
    assert_eq!(root.files.len(), 1);
    assert_eq!(root.files[0].old_path, None);
    assert_eq!(root.files[0].hunks, vec![hunk(0, 0, 1, 4)]);

    let second = repo.diff_commit(&commits[1], 0).unwrap();
    assert_eq!(second.files[0].hunks, vec![hunk(2, 1, 2, 1), hunk(4, 1, 3, 0)]);

    let third = repo.diff_commit(&commits[2], 0).unwrap();
    assert_eq!(third.files[0].hunks, vec![hunk(1, 0, 2, 2)]);

    let fourth = repo.diff_commit(&commits[3], 0).unwrap();
    assert_eq!(fourth.files[0].new_path, None);
    assert_eq!(fourth.files[0].hunks, vec![hunk(1, 5, 0, 0)]);
}

#[test]
fn renames_follow_threshold() {
    let body: Vec<String> = (0..20).map(|i| format!("line {i}")).collect();
    let body: Vec<&str> = body.iter().map(String::as_str).collect();
    let (_d, repo, _) = build(linear(vec![
        ScriptedCommit::new(10).lines("old.txt", &body),
        ScriptedCommit::new(20).delete("old.txt").lines("new.txt", &body),
    ]));
    let commits = repo.list_commits(&RangeOptions::default()).unwrap();
    let diff = repo.diff_commit(&commits[1], 0).unwrap();
    assert_eq!(diff.files.len(), 1);
    assert!(diff.files[0].is_rename());
    assert!(diff.files[0].hunks.is_empty());

    let plain = repo.clone().with_options(DiffOptions {
        rename_threshold: None,
        ..DiffOptions::default()
    });
    let diff = plain.diff_commit(&commits[1], 0).unwrap();
    assert_eq!(diff.files.len(), 2);
}

#[test]
fn rebased_history_keeps_topological_order() {
    // The child carries an earlier timestamp than its parent.
    let (_d, repo, shas) = build(linear(vec![
        ScriptedCommit::new(5000).lines("f", &["a"]),
        ScriptedCommit::new(3000).lines("f", &["a", "b"]),
        ScriptedCommit::new(4000).lines("f", &["a", "b", "c"]),
    ]));
    let commits = repo.list_commits(&RangeOptions::default()).unwrap();
    let order: Vec<&CommitId> = commits.iter().map(|c| &c.sha).collect();
    assert_eq!(order, shas.iter().collect::<Vec<_>>());
}

#[test]
fn time_window_and_empty_history() {
    let (_d, repo, shas) = build(linear(vec![
        ScriptedCommit::new(100).lines("f", &["a"]),
        ScriptedCommit::new(200).lines("f", &["b"]),
        ScriptedCommit::new(300).lines("f", &["c"]),
    ]));
    let got = repo
        .list_commits(&RangeOptions {
            since_ts: Some(150),
            until_ts: Some(300),
            ..RangeOptions::default()
        })
        .unwrap();
    assert_eq!(got.iter().map(|c| &c.sha).collect::<Vec<_>>(), vec![&shas[1], &shas[2]]);

    let none = repo.list_commits(&RangeOptions {
        until_ts: Some(50),
        ..RangeOptions::default()
    });
    assert!(matches!(none, Err(RepoError::EmptyHistory)));

    let missing = repo.list_commits(&RangeOptions {
        branch: Some("no-such-branch".into()),
        ..RangeOptions::default()
    });
    assert!(matches!(missing, Err(RepoError::BranchNotFound(_))));
}

#[test]
fn merges_in_first_parent_walk() {
    let commits = vec![
        ScriptedCommit::new(10).lines("f", &["a", "b"]),
        ScriptedCommit::new(20).branch("topic").parents(&[0]).lines("f", &["a", "b", "t"]),
        ScriptedCommit::new(30).parents(&[0]).lines("f", &["m", "a", "b"]),
        ScriptedCommit::new(40).parents(&[2, 1]).lines("f", &["m", "a", "b", "t"]),
    ];
    let (_d, repo, shas) = build(commits);
    let walk = repo.list_commits(&RangeOptions::default()).unwrap();
    let order: Vec<&CommitId> = walk.iter().map(|c| &c.sha).collect();
    assert_eq!(order, vec![&shas[0], &shas[2], &shas[3]]);
    assert!(walk[2].is_merge());

    // Against the first parent, the merge introduces the topic line.
    let diff = repo.diff_commit(&walk[2], 0).unwrap();
    assert_eq!(diff.files[0].hunks, vec![hunk(3, 0, 4, 1)]);

    // First-parent blame credits the merge itself.
    let spans = repo.blame_range(&shas[3], "f", 4, 1).unwrap();
    assert_eq!(spans[0].origin_sha, shas[3]);

    let all = repo
        .list_commits(&RangeOptions {
            first_parent: false,
            ..RangeOptions::default()
        })
        .unwrap();
    assert_eq!(all.len(), 4);
    assert_eq!(all[0].sha, shas[0]);
    assert_eq!(all[3].sha, shas[3]);
}

#[test]
fn missing_repository() {
    let dir = TempDir::new().unwrap();
    assert!(matches!(
        GitRepo::open(dir.path().join("nope")),
        Err(RepoError::RepoNotFound(_))
    ));
    assert!(matches!(GitRepo::open(dir.path()), Err(RepoError::RepoNotFound(_))));
}

#[test]
fn file_lines_reads_blob() {
    let (_d, repo, shas) = build(vec![ScriptedCommit::new(10).lines("d/f", &["x", "y"])]);
    assert_eq!(repo.file_lines(&shas[0], "d/f").unwrap(), vec!["x", "y"]);
}
