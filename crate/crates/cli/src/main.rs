//! `ham-levy`: run simulations, theory tables and verification suites from a
//! JSON configuration, writing CSV tables and a JSON summary.
//!
//! Exit status is 0 on success, 2 when `--gate` is set and a check fails, and
//! 1 on any error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser};
use serde::Serialize;
use serde_json::Value;

use crate::commands::{execute, Check, Outcome};
use crate::config::{resolve, Command, Format, Overrides, RunConfig, THREADS_ENV};
use crate::error::{CliError, CliResult, ErrorReport};

#[derive(Debug, Parser)]
#[command(name = "ham-levy", version, about = "Hyperbolic Anderson model with Lévy noise: simulation and verification")]
struct Cli {
    /// Pipeline to run.
    #[arg(value_enum)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Args)]
struct Flags {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    paths: Option<usize>,
    /// Worker threads (falls back to HAM_LEVY_THREADS).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Exit with status 2 when a statistical or numerical check fails.
    #[arg(long)]
    gate: bool,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    /// Times (repeat or comma-separate).
    #[arg(long = "t", value_delimiter = ',', allow_negative_numbers = true)]
    t: Vec<f64>,
    /// Second times for covariances and kernel checks.
    #[arg(long = "s", value_delimiter = ',', allow_negative_numbers = true)]
    s: Vec<f64>,
    /// Averaging radii.
    #[arg(long = "R", value_delimiter = ',', allow_negative_numbers = true)]
    radii: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    m2: Option<f64>,
    /// Set any configuration leaf by dotted key, e.g. `--set law.lambda=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            paths: self.paths,
            threads: self.threads,
            out: self.out.clone(),
            t: self.t.clone(),
            s: self.s.clone(),
            radii: self.radii.clone(),
            alpha: self.alpha,
            m2: self.m2,
            set: self.set.clone(),
        }
    }
}

#[derive(Serialize)]
struct Gate<'a> {
    enabled: bool,
    passed: bool,
    checks: &'a [Check],
}

#[derive(Serialize)]
struct Summary<'a> {
    tool: &'static str,
    version: &'static str,
    build: &'static str,
    command: &'static str,
    status: &'static str,
    gate: Gate<'a>,
    config: Option<&'a RunConfig>,
    artifacts: Vec<String>,
    results: Value,
    error: Option<ErrorReport>,
}

fn summary<'a>(command: Command, gate: bool, cfg: Option<&'a RunConfig>, checks: &'a [Check]) -> Summary<'a> {
    Summary {
        tool: "ham-levy",
        version: env!("CARGO_PKG_VERSION"),
        build: env!("HAM_LEVY_GIT_DESCRIBE"),
        command: command.name(),
        status: "ok",
        gate: Gate { enabled: gate, passed: checks.iter().all(|c| c.passed), checks },
        config: cfg,
        artifacts: Vec::new(),
        results: Value::Null,
        error: None,
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<String> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::io(path.display().to_string(), e))?;
    Ok(path.display().to_string())
}

fn emit(summary: &Summary, dir: Option<&Path>, write_json: bool) -> CliResult<()> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    if let (Some(dir), true) = (dir, write_json) {
        write_file(dir, &format!("{}.json", summary.command), format!("{text}\n").as_bytes())?;
    }
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}").map_err(|e| CliError::io("stdout", e))
}

fn run_resolved(cfg: &RunConfig) -> CliResult<(Outcome, PathBuf)> {
    let outcome = execute(cfg)?;
    let dir = PathBuf::from(&cfg.output.directory);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    Ok((outcome, dir))
}

fn fail(command: Command, gate: bool, cfg: Option<&RunConfig>, err: CliError) -> ExitCode {
    eprintln!("error: {err}");
    let mut s = summary(command, gate, cfg, &[]);
    s.status = "error";
    s.gate.passed = false;
    s.error = Some(err.report());
    let dir = cfg.map(|c| PathBuf::from(&c.output.directory)).filter(|d| d.is_dir());
    let json = cfg.is_some_and(|c| c.output.formats.contains(&Format::Json));
    if let Err(e) = emit(&s, dir.as_deref(), json) {
        eprintln!("error: {e}");
    }
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_threads = std::env::var(THREADS_ENV).ok();
    let gate = cli.flags.gate;
    let cfg = match resolve(cli.command, cli.flags.config.as_deref(), &cli.flags.overrides(), env_threads.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => return fail(cli.command, gate, None, e),
    };
    let (outcome, dir) = match run_resolved(&cfg) {
        Ok(v) => v,
        Err(e) => return fail(cli.command, gate, Some(&cfg), e),
    };

    let mut s = summary(cli.command, gate, Some(&cfg), &outcome.checks);
    if cfg.output.formats.contains(&Format::Csv) {
        for artifact in &outcome.artifacts {
            match write_file(&dir, &artifact.file, &artifact.bytes) {
                Ok(path) => s.artifacts.push(path),
                Err(e) => return fail(cli.command, gate, Some(&cfg), e),
            }
        }
    }
    let gate_failed = gate && !s.gate.passed;
    if gate_failed {
        s.status = "gate_failed";
    }
    s.results = outcome.results;
    if let Err(e) = emit(&s, Some(&dir), cfg.output.formats.contains(&Format::Json)) {
        return fail(cli.command, gate, Some(&cfg), e);
    }
    if gate_failed {
        for c in outcome.checks.iter().filter(|c| !c.passed) {
            eprintln!("gate failed: {}: {}", c.name, c.detail);
        }
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
