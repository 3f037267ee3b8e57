//! `nil2` — verdicts, derivation extension, and cover experiments for finite
//! 2-nilpotent graded algebras over small prime fields.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nil2_cli::report::{CheckResult, Report};
use nil2_cli::run::{self, CliError, ErrorKind, RunOptions};
use nil2_cli::suites;

#[derive(Parser)]
#[command(
    name = "nil2",
    version,
    about = "Exact-arithmetic checks for 2-nilpotent graded algebras over F_p"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Field modulus for the run.
    #[arg(long, global = true, default_value_t = 3)]
    p: u32,
    /// Cap on the quotient dimension of subspace enumerations.
    #[arg(long, global = true, default_value_t = 6)]
    cap_enum: usize,
    /// Ambient-dimension budget for workspace growth.
    #[arg(long, global = true, default_value_t = 24)]
    cap_ambient: usize,
    /// Seed for the randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write the full canonical report to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Class-K verdict and a predimension table for an algebra file.
    Check {
        /// Path to the algebra file.
        algebra: String,
        /// Extra span to tabulate: vectors separated by ';', entries by ','.
        /// May be given several times.
        #[arg(long = "span", value_name = "SPAN")]
        spans: Vec<String>,
    },
    /// Replay a growth script, then extend the problem's partial derivation
    /// over its target inside the replayed workspace.
    Extend {
        /// Path to the growth script.
        script: String,
        /// Path to the extension problem.
        problem: String,
    },
    /// Replay a growth script and run the experiments from a file against
    /// the resulting workspace.
    Cover {
        /// Path to the growth script.
        script: String,
        /// Path to the experiment file.
        experiment: String,
    },
    /// Run the nine acceptance suites.
    Accept {
        /// Directory holding the shipped algebra and problem files.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

fn parse_span(raw: &str) -> Result<Vec<Vec<u32>>, CliError> {
    let mut rows = Vec::new();
    for part in raw.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let row: Result<Vec<u32>, _> = part
            .split(',')
            .map(|entry| entry.trim().parse::<u32>())
            .collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Err(CliError {
                    kind: ErrorKind::Parse,
                    message: format!("bad span {raw:?}: {e}"),
                })
            }
        }
    }
    Ok(rows)
}

/// The invocation as recorded in the report. The report destination is not
/// an input, so `--report` and its value are dropped: runs with identical
/// inputs stay byte-identical wherever the report is written.
fn command_echo() -> String {
    let mut parts = Vec::new();
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        if arg == "--report" {
            let _ = args.next();
            continue;
        }
        if arg.starts_with("--report=") {
            continue;
        }
        parts.push(arg);
    }
    parts.join(" ")
}

/// Runs the selected command. The second value is the process exit code for
/// a run that completed: nonzero only when an acceptance suite failed.
fn run_command(cli: &Cli) -> Result<(Report, i32), CliError> {
    let opts = RunOptions {
        p: cli.common.p,
        cap_enum: cli.common.cap_enum,
        cap_ambient: cli.common.cap_ambient,
        seed: cli.common.seed,
    };
    let echo = command_echo();
    match &cli.command {
        Command::Check { algebra, spans } => {
            let spans: Vec<Vec<Vec<u32>>> = spans
                .iter()
                .map(|s| parse_span(s))
                .collect::<Result<_, _>>()?;
            Ok((run::cmd_check(echo, algebra, &spans, &opts)?, 0))
        }
        Command::Extend { script, problem } => {
            Ok((run::cmd_extend(echo, script, problem, &opts)?, 0))
        }
        Command::Cover { script, experiment } => {
            Ok((run::cmd_cover(echo, script, experiment, &opts)?, 0))
        }
        Command::Accept { fixtures } => {
            let dir = fixtures
                .clone()
                .unwrap_or_else(suites::default_fixtures_dir);
            let outcomes = suites::all_suites(&dir, opts.seed);
            let mut report = Report::new(echo, opts.parameters());
            for outcome in &outcomes {
                println!("{}", outcome.line());
                report.push(
                    CheckResult::new(outcome.name, outcome.pass).detail(outcome.detail.clone()),
                );
            }
            let code = if report.all_passed() { 0 } else { 1 };
            Ok((report, code))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let started = Instant::now();
    match run_command(&cli) {
        Ok((report, code)) => {
            print!("{}", report.human_summary());
            println!("elapsed: {} ms", started.elapsed().as_millis());
            if let Some(path) = &cli.common.report {
                if let Err(e) = std::fs::write(path, report.canonical_text()) {
                    eprintln!("error: cannot write report to {}: {e}", path.display());
                    std::process::exit(ErrorKind::Parse.exit_code());
                }
            }
            std::process::exit(code);
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.kind.exit_code());
        }
    }
}
