//! Command-line scenario runner: executes JSON-described operations from
//! the library, printing one result object per scenario.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commact::scenario::{bundled_suites, parse_scenarios, run_all, RunOptions, RunSummary};
use commact::{Budget, Error};

#[derive(Parser)]
#[command(name = "commact", version, about = "Exact computations with commensurating group actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Fallback seed for scenarios that do not pin one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Budget override as KEY=N; repeatable, wins over scenario budgets.
    #[arg(long = "budget", value_name = "KEY=N", global = true)]
    budget: Vec<String>,
    /// Emit compact JSON, one result per line (the default).
    #[arg(long, global = true)]
    json: bool,
    /// Pretty-print each result object.
    #[arg(long, global = true, conflicts_with = "json")]
    pretty: bool,
    /// Run scenarios across threads; output stays in file order.
    #[arg(long, global = true)]
    parallel: bool,
    /// Attach wall-clock timings (breaks byte-for-byte determinism).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios in a JSON file.
    Run { file: PathBuf },
    /// Print the fixture catalogue as JSON.
    ListFixtures,
    /// Run every bundled scenario suite.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(3))
        }
    }
}

fn dispatch(cli: Cli) -> commact::Result<ExitCode> {
    let mut overrides = Vec::with_capacity(cli.budget.len());
    for spec in &cli.budget {
        overrides.push(Budget::parse_override(spec)?);
    }
    let options = RunOptions {
        seed: cli.seed,
        overrides,
        timings: cli.timings,
    };
    match cli.command {
        Command::Run { file } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| Error::Config(format!("{}: {e}", file.display())))?;
            let scenarios = parse_scenarios(&text)?;
            let summary = run_all(&scenarios, &options, cli.parallel);
            print_summary(&summary, cli.pretty)?;
            Ok(exit_code(summary.exit))
        }
        Command::ListFixtures => {
            let catalogue = commact::fixtures::list_fixtures();
            let text = if cli.pretty {
                serde_json::to_string_pretty(&catalogue)
            } else {
                serde_json::to_string(&catalogue)
            }
            .map_err(|e| Error::Config(format!("catalogue serialization: {e}")))?;
            println!("{text}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => {
            let mut scenarios = Vec::new();
            for (suite, text) in bundled_suites() {
                let mut parsed = parse_scenarios(text)
                    .map_err(|e| Error::Config(format!("bundled suite {suite}: {e}")))?;
                scenarios.append(&mut parsed);
            }
            let summary = run_all(&scenarios, &options, cli.parallel);
            print_summary(&summary, cli.pretty)?;
            Ok(exit_code(summary.exit))
        }
    }
}

fn print_summary(summary: &RunSummary, pretty: bool) -> commact::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for result in &summary.results {
        let line = if pretty {
            serde_json::to_string_pretty(result)
        } else {
            serde_json::to_string(result)
        }
        .map_err(|e| Error::Config(format!("result serialization: {e}")))?;
        writeln!(out, "{line}").map_err(|e| Error::Config(format!("stdout: {e}")))?;
    }
    Ok(())
}

fn exit_code(code: i32) -> ExitCode {
    ExitCode::from(u8::try_from(code).unwrap_or(3))
}
