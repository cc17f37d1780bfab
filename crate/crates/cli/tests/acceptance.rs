//! End-to-end acceptance checks. Each prints one PASS/FAIL line on stderr
//! (written directly, so it shows even when output is captured).

use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;
use ttm_core::cost_model::{eval_model, fit_alpha, CostObservation};
use ttm_core::engine::{analyze, EngineOptions, Outcome, TtmRecord};
use ttm_core::export::{read_hunks, read_summaries, Format};
use ttm_core::hunk_index::{BackendOptions, DiskIndex, HunkIndex, DEFAULT_CACHE_BUCKETS};
use ttm_core::repo_source::{CommitId, RangeOptions};
use ttm_core::stats::{summarize, Grouping, TimeUnit};
use ttm_core::synth::script::{linear, write_history, ScriptedCommit};
use ttm_core::synth::{generate, oracle_ttm, EditMix, SynthSpec};

fn criterion<F: FnOnce() + UnwindSafe>(n: u32, name: &str, body: F) {
    let started = Instant::now();
    let result = catch_unwind(body);
    let verdict = if result.is_ok() { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "[acceptance] criterion {n} {verdict}: {name} ({:.1}s)",
        started.elapsed().as_secs_f64()
    );
    if let Err(p) = result {
        resume_unwind(p);
    }
}

fn ttm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttm"))
        .args(args)
        .env("TTM_NO_COLOR", "1")
        .output()
        .expect("ttm runs")
}

fn ttm_ok(args: &[&str]) -> Output {
    let out = ttm(args);
    assert!(
        out.status.success(),
        "ttm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// C1 (t=0) adds three lines, C2 (t=100) rewrites line 2, C3 (t=250)
/// rewrites line 3.
fn toy_repo(dir: &Path) -> (PathBuf, Vec<CommitId>) {
    let path = dir.join("toy.git");
    let shas = write_history(
        &path,
        &linear(vec![
            ScriptedCommit::new(0).lines("a.txt", &["alpha", "beta", "gamma"]),
            ScriptedCommit::new(100).lines("a.txt", &["alpha", "BETA", "gamma"]),
            ScriptedCommit::new(250).lines("a.txt", &["alpha", "BETA", "GAMMA"]),
        ]),
    )
    .unwrap();
    (path, shas)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn c1_oracle_equivalence() {
    criterion(1, "engine matches oracle on 200 synthetic repos", || {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for seed in 0..200u64 {
            let add = rng.gen_range(0.2..1.0);
            let replace = rng.gen_range(0.0..(1.0 - add));
            let lo = rng.gen_range(1..=3);
            let spec = SynthSpec {
                seed,
                n_commits: rng.gen_range(1..=20),
                n_devs: rng.gen_range(1..=5),
                files: rng.gen_range(1..=3),
                edit_mix: EditMix {
                    add,
                    replace,
                    delete: 1.0 - add - replace,
                },
                lines_per_hunk: (lo, lo + rng.gen_range(0..=3)),
                inter_commit_seconds: (1, rng.gen_range(1..=100_000)),
                edits_per_commit: (1, rng.gen_range(1..=4)),
                initial_file_lines: if rng.gen_bool(0.3) { rng.gen_range(1..=20) } else { 0 },
                start_ts: 1_500_000_000,
            };
            let dir = TempDir::new().unwrap();
            let synth = generate(&spec, dir.path()).unwrap();
            let expected = oracle_ttm(&synth.manifest).unwrap();
            let (got, meta) = analyze(
                &synth.repo_path,
                &RangeOptions::default(),
                &BackendOptions::memory(),
                &EngineOptions::default(),
            )
            .unwrap();
            assert_eq!(got, expected, "seed {seed}: {spec:?}");
            assert_eq!(meta.hunks_registered, synth.manifest.hunk_count(), "seed {seed}");
        }
        let elapsed = started.elapsed();
        assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    });
}

#[test]
fn c2_toy_fixture() {
    criterion(2, "toy fixture: first hunk 100 s, later hunks censored", || {
        let dir = TempDir::new().unwrap();
        let (repo, shas) = toy_repo(dir.path());
        let out = dir.path().join("r");
        ttm_ok(&["analyze", s(&repo), "--backend", "mem", "--out", s(&out), "--unit", "seconds"]);

        let recs = read_hunks(&out.join("hunks.csv"), Format::Csv).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].key.intro_sha, shas[0]);
        assert_eq!((recs[0].key.new_start, recs[0].key.new_end), (1, 3));
        assert_eq!(
            recs[0].outcome,
            Outcome::Measured {
                ttm_seconds: 100,
                first_mod_sha: shas[1].clone()
            }
        );
        assert_eq!(recs[1].key.intro_sha, shas[1]);
        assert_eq!(recs[1].outcome, Outcome::Censored);
        assert_eq!(recs[2].key.intro_sha, shas[2]);
        assert_eq!(recs[2].outcome, Outcome::Censored);

        let sums = read_summaries(&out.join("summary.csv"), Format::Csv).unwrap();
        let repo_row = sums.iter().find(|s| s.group_key.to_string() == "repo").unwrap();
        assert_eq!(repo_row.mttm, Some(100.0));
        assert_eq!((repo_row.n_measured, repo_row.n_censored), (1, 2));
    });
}

fn injected(ttms: &[i64]) -> Vec<TtmRecord> {
    ttms.iter()
        .enumerate()
        .map(|(i, &t)| TtmRecord {
            key: ttm_core::hunk_index::HunkKey::new(
                CommitId::new(format!("{:040x}", i + 1)).unwrap(),
                "f",
                1,
                1,
            ),
            author_id: "a".into(),
            intro_ts: 0,
            outcome: Outcome::Measured {
                ttm_seconds: t,
                first_mod_sha: CommitId::new("e".repeat(40)).unwrap(),
            },
        })
        .collect()
}

#[test]
fn c3_mttm_formula() {
    criterion(3, "MTTM, median and sample stddev", || {
        let a = &summarize(&injected(&[100, 200, 300, 400]), Grouping::Repo, TimeUnit::Seconds)[0];
        assert!(rel(a.mttm.unwrap(), 250.0) <= 1e-9);
        assert!(rel(a.median.unwrap(), 250.0) <= 1e-9);

        let b = &summarize(&injected(&[1, 3]), Grouping::Repo, TimeUnit::Seconds)[0];
        assert!(rel(b.mttm.unwrap(), 2.0) <= 1e-9);
        assert!(rel(b.stddev.unwrap(), 2f64.sqrt()) <= 1e-9);
    });
}

#[test]
fn c4_backend_equivalence() {
    criterion(4, "memory and disk backends agree; disk store reopens identically", || {
        for seed in 0..20u64 {
            let dir = TempDir::new().unwrap();
            let spec = SynthSpec {
                seed: 1000 + seed,
                n_commits: 15,
                files: 3,
                edits_per_commit: (1, 4),
                ..SynthSpec::default()
            };
            let synth = generate(&spec, &dir.path().join("s")).unwrap();
            let repo = s(&synth.repo_path);
            let mem_out = dir.path().join("mem");
            let disk_out = dir.path().join("disk");
            let store = dir.path().join("store");
            ttm_ok(&["analyze", repo, "--backend", "mem", "--out", s(&mem_out)]);
            ttm_ok(&["analyze", repo, "--backend", "disk", "--store", s(&store), "--out", s(&disk_out)]);
            let mem_csv = fs::read(mem_out.join("hunks.csv")).unwrap();
            let disk_csv = fs::read(disk_out.join("hunks.csv")).unwrap();
            assert_eq!(mem_csv, disk_csv, "seed {seed}");

            // Reopen the store and compare with a fresh in-memory run.
            let reopened = DiskIndex::open(&store, DEFAULT_CACHE_BUCKETS).unwrap();
            let (mem_index, _) = ttm_core::engine::process_repository(
                &synth.repo_path,
                &RangeOptions::default(),
                &BackendOptions::memory(),
                &EngineOptions::default(),
            )
            .unwrap();
            assert_eq!(reopened.iterate_all().unwrap(), mem_index.iterate_all().unwrap());
            assert_eq!(reopened.len(), mem_index.len());

            // A second reopen sees the same state again.
            drop(reopened);
            let again = DiskIndex::open(&store, DEFAULT_CACHE_BUCKETS).unwrap();
            assert_eq!(again.iterate_all().unwrap(), mem_index.iterate_all().unwrap());
        }
    });
}

#[test]
fn c5_subsequent_modifications_ignored() {
    criterion(5, "only the first later modification is recorded", || {
        let dir = TempDir::new().unwrap();
        let repo = dir.path().join("r.git");
        let shas = write_history(
            &repo,
            &linear(vec![
                ScriptedCommit::new(1_000).lines("f", &["a", "b", "c", "d", "e"]),
                ScriptedCommit::new(1_300).lines("f", &["a", "B", "c", "d", "e"]),
                ScriptedCommit::new(9_000).lines("f", &["a", "B", "c", "D", "e"]),
            ]),
        )
        .unwrap();
        let out = dir.path().join("out");
        ttm_ok(&["analyze", s(&repo), "--out", s(&out)]);
        let recs = read_hunks(&out.join("hunks.csv"), Format::Csv).unwrap();
        let first = recs.iter().find(|r| r.key.intro_sha == shas[0]).unwrap();
        assert_eq!(
            first.outcome,
            Outcome::Measured {
                ttm_seconds: 300,
                first_mod_sha: shas[1].clone()
            }
        );
    });
}

#[test]
fn c6_cost_model() {
    criterion(6, "cost model evaluation and alpha recovery", || {
        let expected = 200.0 * 10f64.ln() * 100f64.ln();
        let got = eval_model(2.0, 100.0, 10.0, 100.0).unwrap();
        assert!(rel(got, expected) <= 1e-6);
        assert!((got - 2120.75).abs() < 0.01);

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let points: Vec<(f64, f64, f64)> = (0..50)
            .map(|_| {
                (
                    rng.gen_range(1..5000) as f64,
                    rng.gen_range(1..40) as f64,
                    rng.gen_range(1..3000) as f64,
                )
            })
            .collect();
        let alpha = 3.5;
        let exact: Vec<CostObservation> = points
            .iter()
            .map(|&(h, d, t)| CostObservation {
                hunks: h,
                developers: d,
                commits: t,
                measured_seconds: alpha * h * d.max(2.0).ln() * t.max(2.0).ln(),
            })
            .collect();
        assert!(rel(fit_alpha(&exact).unwrap().alpha, alpha) <= 1e-9);

        let noisy: Vec<CostObservation> = exact
            .iter()
            .map(|o| CostObservation {
                measured_seconds: o.measured_seconds * (1.0 + rng.gen_range(-0.01..=0.01)),
                ..*o
            })
            .collect();
        let fit = fit_alpha(&noisy).unwrap();
        assert!((3.465..=3.535).contains(&fit.alpha), "alpha {}", fit.alpha);
        assert_eq!(fit.n_points, 50);
    });
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn c7_determinism() {
    criterion(7, "repeated analyze runs are byte-identical across worker counts", || {
        let dir = TempDir::new().unwrap();
        let spec = SynthSpec {
            seed: 77,
            n_commits: 60,
            files: 8,
            n_devs: 4,
            edits_per_commit: (2, 6),
            ..SynthSpec::default()
        };
        let synth = generate(&spec, &dir.path().join("s")).unwrap();
        let repo = s(&synth.repo_path);
        let mut outputs = Vec::new();
        for (i, workers) in ["1", "8", "1", "8"].iter().enumerate() {
            let out = dir.path().join(format!("out{i}"));
            ttm_ok(&["analyze", repo, "--workers", workers, "--out", s(&out)]);
            outputs.push(dir_bytes(&out));
        }
        assert_eq!(outputs[0].len(), 3);
        assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    });
}

#[test]
fn c8_desk_scale_performance() {
    criterion(8, "2000-commit repo analyzed in under 5 minutes; bench reports fit", || {
        let dir = TempDir::new().unwrap();
        let spec = SynthSpec {
            seed: 2024,
            n_commits: 2000,
            n_devs: 12,
            files: 40,
            edits_per_commit: (3, 9),
            ..SynthSpec::default()
        };
        let synth = generate(&spec, &dir.path().join("s")).unwrap();
        let hunks = synth.manifest.hunk_count();
        assert!((8_000..=12_000).contains(&hunks), "{hunks} hunks");

        let out = dir.path().join("out");
        let started = Instant::now();
        ttm_ok(&["analyze", s(&synth.repo_path), "--backend", "mem", "--out", s(&out)]);
        let elapsed = started.elapsed();
        let _ = writeln!(
            std::io::stderr(),
            "[acceptance] 2000 commits / {hunks} hunks analyzed in {:.1}s",
            elapsed.as_secs_f64()
        );
        assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
        let recs = read_hunks(&out.join("hunks.csv"), Format::Csv).unwrap();
        assert_eq!(recs.len(), hunks);

        let bench_out = dir.path().join("bench");
        let bench = ttm_ok(&["bench", "--grid", "small", "--out", s(&bench_out)]);
        let text = String::from_utf8_lossy(&bench.stdout);
        for backend in ["mem", "disk"] {
            let line = text
                .lines()
                .find(|l| l.starts_with(backend))
                .unwrap_or_else(|| panic!("no fit line for {backend}: {text}"));
            assert!(line.contains("alpha=") && line.contains("r2="), "{line}");
        }
        let csv = fs::read_to_string(bench_out.join("bench.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("H,D,T,backend,measured_seconds,predicted_seconds,residual")
        );
        assert_eq!(lines.count(), 8);
    });
}

#[test]
fn c9_gate_semantics() {
    criterion(9, "gate exits 0 / 1 / 0 for pass / violation / insufficient sample", || {
        let dir = TempDir::new().unwrap();
        let (repo, _) = toy_repo(dir.path());
        let out = dir.path().join("r");
        ttm_ok(&["analyze", s(&repo), "--out", s(&out)]);
        let src = s(&out);

        let pass = ttm(&["gate", src, "--min-mttm", "50s", "--min-sample", "1"]);
        assert_eq!(pass.status.code(), Some(0));

        let fail = ttm(&["gate", src, "--min-mttm", "200", "--unit", "seconds", "--min-sample", "1"]);
        assert_eq!(fail.status.code(), Some(1));
        assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL repo"));

        let skip = ttm(&["gate", src, "--min-mttm", "200s"]);
        assert_eq!(skip.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&skip.stderr).contains("insufficient data"));
    });
}
