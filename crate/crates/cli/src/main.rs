//! `lproth`: seeded experiment suites with JSON reports and CSV curves.
//!
//! Exit codes: 0 when every check passes, 1 on usage errors, 2 when a check
//! fails, 3 on internal failures (numerical budgets, unwritable output).

mod config;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use config::{parse_config, Overrides, Suite};
use report::{emit, lint, schema, Report, Timing};
use suites::Runner;

#[derive(Parser, Debug)]
#[command(name = "lproth", version, about = "Progressions with lp-constrained gaps: numerical experiment suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a suite and write its report.
    Run(RunArgs),
    /// List the available suites.
    List,
    /// Print the JSON schema of the report.
    Schema,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    #[arg(long)]
    suite: Option<String>,
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "N")]
    n: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

const EXIT_USAGE: u8 = 1;
const EXIT_FAILED: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("LPROTH_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("LPROTH_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("LPROTH_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(args: RunArgs) -> ExitCode {
    let file = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(s) => Some(s),
            Err(e) => return usage(format!("cannot read {}: {e}", path.display())),
        },
        None => None,
    };
    let flags = Overrides {
        suite: args.suite,
        p: args.p,
        d: args.d,
        n: args.n,
        epsilon: args.epsilon,
        seed: args.seed,
        out: args.out,
        format: args.format,
    };
    let cfg = match parse_config(&flags, file.as_deref()) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    if let Err(e) = configure_threads() {
        return usage(e);
    }

    let started_unix_ms = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    let start = Instant::now();
    let mut runner = Runner::new(&cfg);
    if let Err(e) = runner.run(cfg.suite) {
        eprintln!("internal error: {e}");
        return ExitCode::from(EXIT_INTERNAL);
    }
    let timing = Timing {
        started_unix_ms,
        elapsed_s: start.elapsed().as_secs_f64(),
        check_seconds: runner.seconds,
    };
    let names = runner.sidecars.iter().map(|(n, _)| n.clone()).collect();
    let report = Report::new(cfg.clone(), runner.records, names, timing);
    if let Err(e) = lint(&report) {
        eprintln!("internal error: report rejected by linter: {e}");
        return ExitCode::from(EXIT_INTERNAL);
    }
    if let Err(e) = emit(&report, &runner.sidecars, &cfg.out_dir) {
        eprintln!("internal error: cannot write to {}: {e}", cfg.out_dir.display());
        return ExitCode::from(EXIT_INTERNAL);
    }
    for r in &report.records {
        println!("{:<4} {:<32} {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.anchor);
    }
    println!(
        "{} of {} checks passed; report in {}",
        report.summary.passed,
        report.summary.total,
        cfg.out_dir.display()
    );
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run(args) => run(args),
        Command::List => {
            for s in Suite::ALL {
                println!("{:<16} {}", s.name(), s.describe());
            }
            ExitCode::SUCCESS
        }
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&schema()).expect("schema serializes"));
            ExitCode::SUCCESS
        }
    }
}
