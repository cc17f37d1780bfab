mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Time-to-modification analysis for Git repositories.
#[derive(Debug, Parser)]
#[command(name = "ttm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a repository and write per-hunk records and summaries.
    Analyze(AnalyzeArgs),
    /// Summarize records from an analysis directory or a repository.
    Stats(StatsArgs),
    /// Fail when MTTM falls below a threshold.
    Gate(GateArgs),
    /// Time the engine on generated histories and fit the cost model.
    Bench(BenchArgs),
    /// Generate a synthetic repository with an edit manifest.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RangeArgs {
    /// Branch or revision to walk (default HEAD).
    #[arg(long)]
    pub branch: Option<String>,
    /// Earliest committer time: epoch seconds, YYYY-MM-DD or RFC 3339.
    #[arg(long)]
    pub since: Option<String>,
    /// Latest committer time, inclusive.
    #[arg(long)]
    pub until: Option<String>,
    /// Follow first parents only (default).
    #[arg(long, overrides_with = "all_commits")]
    pub first_parent: bool,
    /// Walk every reachable commit.
    #[arg(long)]
    pub all_commits: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Hunk index backend: mem or disk.
    #[arg(long, default_value = "mem")]
    pub backend: String,
    /// Store directory for the disk backend.
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Concurrent blame queries per commit.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Unit for summaries: seconds, minutes, hours or days.
    #[arg(long, default_value = "days")]
    pub unit: String,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub repo: PathBuf,
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    /// Directory for hunks, summary and run metadata.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Analysis output directory, or a repository to analyze first.
    pub source: PathBuf,
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    /// Grouping: repo, author, path-prefix or path-prefix:N.
    #[arg(long, default_value = "repo")]
    pub group: String,
    /// Emit a time series over introduction windows of this width (e.g. 7d).
    #[arg(long)]
    pub window: Option<String>,
    /// Write summaries to this file instead of printing a table.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GateArgs {
    /// Analysis output directory, or a repository to analyze first.
    pub source: PathBuf,
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Minimum MTTM, e.g. 30d or 12h; a bare number uses --unit.
    #[arg(long)]
    pub min_mttm: String,
    /// Scope: repo, author, path-prefix or path-prefix:N.
    #[arg(long, default_value = "repo")]
    pub scope: String,
    /// Groups with fewer measured hunks are skipped.
    #[arg(long, default_value_t = ttm_core::gate::DEFAULT_MIN_SAMPLE)]
    pub min_sample: usize,
    #[arg(long, default_value = "days")]
    pub unit: String,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Named grid: small or medium.
    #[arg(long, default_value = "small")]
    pub grid: String,
    /// Backends to time; repeat for several (default: mem and disk).
    #[arg(long)]
    pub backend: Vec<String>,
    /// Directory for bench.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory; must be absent or empty.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub commits: u32,
    #[arg(long, default_value_t = 3)]
    pub devs: u32,
    #[arg(long, default_value_t = 2)]
    pub files: u32,
    /// Edit fractions as add,replace,delete.
    #[arg(long, default_value = "0.5,0.3,0.2")]
    pub mix: String,
    /// Lines per edit as MIN,MAX.
    #[arg(long, default_value = "1,4")]
    pub lines: String,
    /// Seconds between commits as MIN,MAX.
    #[arg(long, default_value = "60,86400")]
    pub interval: String,
    /// Edits per commit as MIN,MAX.
    #[arg(long, default_value = "1,3")]
    pub edits: String,
    /// Lines every file starts with in the first commit.
    #[arg(long, default_value_t = 0)]
    pub initial_lines: u32,
    #[arg(long, default_value_t = 1_600_000_000)]
    pub start_ts: i64,
}

fn main() -> ExitCode {
    output::configure_color();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Stats(a) => commands::stats(a),
        Command::Gate(a) => commands::gate(a),
        Command::Bench(a) => commands::bench(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{} {e}", output::paint("error:", output::RED));
            ExitCode::from(e.exit_code())
        }
    }
}
