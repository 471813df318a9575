use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use iwalab_core::workbench::{parse_problem, run, Command, RunOptions};

/// Iwasawa-module workbench: characteristic elements, twisted Euler
/// characteristics, Akashi series and twist searches from a problem file.
#[derive(Parser, Debug)]
#[command(name = "iwalab", version)]
struct Cli {
    /// One of: prepare, char, euler, akashi, find-twist, selftest
    #[arg(value_parser = parse_command)]
    command: Command,
    /// Problem file (JSON)
    #[arg(long)]
    input: PathBuf,
    /// Starting precision N (digits of p)
    #[arg(long)]
    precision: Option<u32>,
    /// Cap for precision doubling
    #[arg(long = "max-precision")]
    max_precision: Option<u32>,
    /// Twist-search candidate budget
    #[arg(long)]
    budget: Option<usize>,
    /// Report file; defaults to <input>.report.json
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_command(s: &str) -> Result<Command, String> {
    s.parse()
}

fn execute(cli: &Cli) -> Result<bool> {
    let text = std::fs::read_to_string(&cli.input).with_context(|| format!("reading {}", cli.input.display()))?;
    let problem = parse_problem(&text)?;
    let options = RunOptions { precision: cli.precision, max_precision: cli.max_precision, budget: cli.budget };
    let report = run(&problem, cli.command, options)?;
    print!("{}", report.to_table());
    let out = cli.out.clone().unwrap_or_else(|| {
        let mut s = cli.input.clone().into_os_string();
        s.push(".report.json");
        PathBuf::from(s)
    });
    std::fs::write(&out, report.to_json()).with_context(|| format!("writing {}", out.display()))?;
    println!("report written to {}", out.display());
    Ok(report.all_decided)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
