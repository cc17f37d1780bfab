use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate};
use ttm_core::bench::{benchmark_suite, named_grid, save_csv};
use ttm_core::engine::{analyze as run_engine, EngineError, EngineOptions, Outcome, RunMetadata, TtmRecord};
use ttm_core::export::{self, Format, HUNKS_STEM, RUN_FILE, SUMMARY_STEM};
use ttm_core::gate::{evaluate, parse_duration, GateConfig, GateScope};
use ttm_core::hunk_index::{BackendKind, BackendOptions};
use ttm_core::repo_source::{RangeOptions, RepoError};
use ttm_core::stats::{summarize, timeseries_mttm, DurabilitySummary, Grouping, TimeUnit};
use ttm_core::synth::{generate, EditMix, SynthSpec};

use crate::output::{fmt_opt, paint, table, Cleanup, BOLD, GREEN, RED, YELLOW};
use crate::{AnalyzeArgs, BenchArgs, EngineArgs, GateArgs, RangeArgs, StatsArgs, SynthArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_GATE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_FAILURE: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn failure(e: impl fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Repo(RepoError::EmptyHistory) => {
                failure("EmptyHistory: no commits in the selected range")
            }
            e => failure(e),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn parse_time(raw: &str) -> Result<i64> {
    if let Ok(secs) = raw.parse::<i64>() {
        return Ok(secs);
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Ok(t.timestamp());
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc().timestamp())
        .map_err(|_| usage(format!("cannot parse time {raw:?}")))
}

fn range_options(r: &RangeArgs) -> Result<RangeOptions> {
    Ok(RangeOptions {
        branch: r.branch.clone(),
        since_ts: r.since.as_deref().map(parse_time).transpose()?,
        until_ts: r.until.as_deref().map(parse_time).transpose()?,
        first_parent: !r.all_commits || r.first_parent,
    })
}

fn parse_format(raw: &str) -> Result<Format> {
    raw.parse().map_err(usage)
}

fn parse_unit(raw: &str) -> Result<TimeUnit> {
    raw.parse().map_err(usage)
}

fn parse_backend(raw: &str) -> Result<BackendKind> {
    raw.parse().map_err(usage)
}

fn engine_options(e: &EngineArgs) -> Result<EngineOptions> {
    if e.workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    Ok(EngineOptions {
        workers: e.workers,
        ..EngineOptions::default()
    })
}

fn output_path(dir: &Path, stem: &str, format: Format) -> PathBuf {
    dir.join(format!("{stem}.{}", format.extension()))
}

/// Repo-wide row followed by one row per author.
fn standard_summaries(records: &[TtmRecord], unit: TimeUnit) -> Vec<DurabilitySummary> {
    let mut rows = summarize(records, Grouping::Repo, unit);
    rows.extend(summarize(records, Grouping::ByAuthor, unit));
    rows
}

pub fn analyze(args: AnalyzeArgs) -> Result<u8> {
    let range = range_options(&args.range)?;
    let opts = engine_options(&args.engine)?;
    let kind = parse_backend(&args.engine.backend)?;
    let format = parse_format(&args.report.format)?;
    let unit = parse_unit(&args.report.unit)?;
    if kind == BackendKind::Memory && args.engine.store.is_some() {
        return Err(usage("--store only applies to --backend disk"));
    }

    let mut cleanup = Cleanup::new();
    cleanup.create_dir(&args.out).map_err(failure)?;
    let backend = match kind {
        BackendKind::Memory => BackendOptions::memory(),
        BackendKind::Disk => {
            let store = args
                .engine
                .store
                .clone()
                .unwrap_or_else(|| args.out.join("store"));
            cleanup.create_dir(&store).map_err(failure)?;
            BackendOptions::disk(store)
        }
    };

    let (records, meta) = run_engine(&args.repo, &range, &backend, &opts)?;
    let summaries = standard_summaries(&records, unit);

    let hunks_path = cleanup.file(output_path(&args.out, HUNKS_STEM, format));
    export::write_hunks(&hunks_path, &records, format).map_err(failure)?;
    let summary_path = cleanup.file(output_path(&args.out, SUMMARY_STEM, format));
    export::write_summaries(&summary_path, &summaries, format).map_err(failure)?;
    let run_path = cleanup.file(args.out.join(RUN_FILE));
    export::write_run_metadata(&run_path, &meta).map_err(failure)?;
    cleanup.keep();

    print_run(&args.repo, &records, &meta, &summaries[0], opts.workers);
    println!(
        "wrote        {}, {}, {}",
        hunks_path.display(),
        summary_path.display(),
        run_path.display()
    );
    Ok(EXIT_OK)
}

fn print_run(repo: &Path, records: &[TtmRecord], meta: &RunMetadata, repo_row: &DurabilitySummary, workers: usize) {
    let count = |f: fn(&Outcome) -> bool| records.iter().filter(|r| f(&r.outcome)).count();
    let measured = count(|o| matches!(o, Outcome::Measured { .. }));
    let censored = count(|o| matches!(o, Outcome::Censored));
    let negative = count(|o| matches!(o, Outcome::NegativeDelta { .. }));
    println!("{}", paint(&format!("repository   {}", repo.display()), BOLD));
    println!("commits      {}", meta.commits_processed);
    println!("authors      {}", meta.distinct_authors);
    println!(
        "hunks        {} registered: {measured} measured, {censored} censored, {negative} negative",
        meta.hunks_registered
    );
    println!(
        "MTTM         {} {} (median {}, stddev {})",
        fmt_opt(repo_row.mttm),
        repo_row.unit,
        fmt_opt(repo_row.median),
        fmt_opt(repo_row.stddev)
    );
    if meta.binary_files_skipped + meta.submodules_skipped + meta.unattributed_lines > 0 {
        println!(
            "skipped      {} binary, {} submodule changes; {} unattributed lines",
            meta.binary_files_skipped, meta.submodules_skipped, meta.unattributed_lines
        );
    }
    println!("backend      {}, {workers} worker(s)", meta.backend_kind);
    println!("wall time    {:.3} s", meta.wall_seconds);
}

/// Records from an analysis directory, or from analyzing a repository.
fn load_records(source: &Path, range: &RangeArgs, engine: &EngineArgs) -> Result<Vec<TtmRecord>> {
    for format in [Format::Csv, Format::Json] {
        let path = output_path(source, HUNKS_STEM, format);
        if path.is_file() {
            return export::read_hunks(&path, format).map_err(failure);
        }
    }
    let range = range_options(range)?;
    let opts = engine_options(engine)?;
    let scratch;
    let backend = match parse_backend(&engine.backend)? {
        BackendKind::Memory => BackendOptions::memory(),
        BackendKind::Disk => match &engine.store {
            Some(store) => BackendOptions::disk(store),
            None => {
                scratch = tempfile::TempDir::new().map_err(failure)?;
                BackendOptions::disk(scratch.path())
            }
        },
    };
    Ok(run_engine(source, &range, &backend, &opts)?.0)
}

fn parse_grouping(raw: &str) -> Result<Grouping> {
    Ok(raw.parse::<GateScope>().map_err(usage)?.grouping())
}

pub fn stats(args: StatsArgs) -> Result<u8> {
    let format = parse_format(&args.report.format)?;
    let unit = parse_unit(&args.report.unit)?;
    let grouping = parse_grouping(&args.group)?;
    let window = args
        .window
        .as_deref()
        .map(|w| parse_duration(w, TimeUnit::Seconds).map_err(usage))
        .transpose()?
        .map(|w| w.round() as i64);
    if window.is_some_and(|w| w <= 0) {
        return Err(usage("--window must be positive"));
    }
    let records = load_records(&args.source, &args.range, &args.engine)?;
    let summaries = match window {
        Some(w) => timeseries_mttm(&records, w, unit).into_iter().map(|(_, s)| s).collect(),
        None => summarize(&records, grouping, unit),
    };

    match &args.out {
        Some(path) => {
            let mut cleanup = Cleanup::new();
            if let Some(parent) = path.parent() {
                cleanup.create_dir(parent).map_err(failure)?;
            }
            let path = cleanup.file(path.clone());
            export::write_summaries(&path, &summaries, format).map_err(failure)?;
            cleanup.keep();
            println!("wrote {} group(s) to {}", summaries.len(), path.display());
        }
        None => print!("{}", summary_table(&summaries)),
    }
    Ok(EXIT_OK)
}

fn summary_table(summaries: &[DurabilitySummary]) -> String {
    let header = [
        "group", "unit", "n", "mttm", "median", "stddev", "p25", "p75", "p90", "censored", "negative",
    ];
    let rows: Vec<Vec<String>> = summaries
        .iter()
        .map(|s| {
            vec![
                s.group_key.to_string(),
                s.unit.to_string(),
                s.n_measured.to_string(),
                fmt_opt(s.mttm),
                fmt_opt(s.median),
                fmt_opt(s.stddev),
                fmt_opt(s.p25),
                fmt_opt(s.p75),
                fmt_opt(s.p90),
                s.n_censored.to_string(),
                s.n_negative.to_string(),
            ]
        })
        .collect();
    table(&header, &rows)
}

pub fn gate(args: GateArgs) -> Result<u8> {
    let unit = parse_unit(&args.unit)?;
    let min = parse_duration(&args.min_mttm, unit).map_err(usage)?;
    let scope: GateScope = args.scope.parse().map_err(usage)?;
    let config = GateConfig::new(min, scope, args.min_sample).map_err(usage)?;
    let records = load_records(&args.source, &args.range, &args.engine)?;
    let report = evaluate(&records, &config);

    let show = |s: Option<f64>| fmt_opt(s.map(|v| v / unit.divisor()));
    for v in &report.passing {
        println!(
            "{} {}  mttm={} {unit}  n={}",
            paint("PASS", GREEN),
            v.key,
            show(v.mttm_seconds),
            v.n_measured
        );
    }
    for v in &report.violations {
        println!(
            "{} {}  mttm={} {unit} < {}  n={}",
            paint("FAIL", RED),
            v.key,
            show(v.mttm_seconds),
            show(Some(min)),
            v.n_measured
        );
    }
    for v in &report.insufficient {
        eprintln!(
            "{} {}: insufficient data (n={} < {})",
            paint("warning:", YELLOW),
            v.key,
            v.n_measured,
            config.min_sample
        );
    }
    if report.passed() {
        println!("gate passed");
        Ok(EXIT_OK)
    } else {
        println!("gate failed: {} group(s) below minimum", report.violations.len());
        Ok(EXIT_GATE)
    }
}

pub fn bench(args: BenchArgs) -> Result<u8> {
    let grid = named_grid(&args.grid)
        .ok_or_else(|| usage(format!("unknown grid {:?} (expected small or medium)", args.grid)))?;
    let backends = if args.backend.is_empty() {
        vec![BackendKind::Memory, BackendKind::Disk]
    } else {
        args.backend
            .iter()
            .map(|b| parse_backend(b))
            .collect::<Result<Vec<_>>>()?
    };

    let work = tempfile::TempDir::new().map_err(failure)?;
    let report = benchmark_suite(&grid, &backends, work.path()).map_err(failure)?;
    if !report.mismatched_points.is_empty() {
        return Err(failure(format!(
            "backends disagree on grid point(s) {:?}",
            report.mismatched_points
        )));
    }

    let mut cleanup = Cleanup::new();
    cleanup.create_dir(&args.out).map_err(failure)?;
    let csv_path = cleanup.file(args.out.join("bench.csv"));
    save_csv(&report, &csv_path).map_err(failure)?;
    cleanup.keep();

    for f in &report.fits {
        match &f.fit {
            Ok(p) => println!(
                "{:<5} alpha={:.6e}  r2={:.4}  n_points={}",
                f.backend.to_string(),
                p.alpha,
                p.r_squared,
                p.n_points
            ),
            Err(e) => println!("{:<5} fit unavailable: {e}", f.backend.to_string()),
        }
    }
    println!("wrote {}", csv_path.display());
    Ok(EXIT_OK)
}

fn parse_pair<T: std::str::FromStr>(raw: &str, name: &str) -> Result<(T, T)> {
    let bad = || usage(format!("--{name} expects MIN,MAX, got {raw:?}"));
    let (a, b) = raw.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn synth(args: SynthArgs) -> Result<u8> {
    let parts: Vec<f64> = args
        .mix
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("--mix expects add,replace,delete, got {:?}", args.mix)))?;
    let [add, replace, delete] = parts[..] else {
        return Err(usage("--mix expects three fractions"));
    };
    let spec = SynthSpec {
        seed: args.seed,
        n_commits: args.commits,
        n_devs: args.devs,
        files: args.files,
        edit_mix: EditMix { add, replace, delete },
        lines_per_hunk: parse_pair(&args.lines, "lines")?,
        inter_commit_seconds: parse_pair(&args.interval, "interval")?,
        edits_per_commit: parse_pair(&args.edits, "edits")?,
        initial_file_lines: args.initial_lines,
        start_ts: args.start_ts,
    };
    spec.validate().map_err(usage)?;
    let repo = generate(&spec, &args.out).map_err(|e| match e {
        ttm_core::synth::SynthError::PathNotEmpty(_) => usage(e),
        e => failure(e),
    })?;
    println!("repository   {}", repo.repo_path.display());
    println!("manifest     {}", repo.manifest_path.display());
    println!(
        "commits      {}, hunks {}, events {}",
        repo.manifest.commit_count(),
        repo.manifest.hunk_count(),
        repo.manifest.events.len()
    );
    Ok(EXIT_OK)
}
