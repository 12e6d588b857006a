//! Command-line front end.
//!
//! `tumordde analyze|hopf|normalform|simulate|reproduce-paper` with an
//! optional `--config FILE`, flag overrides and `--json` output. Exit
//! statuses: 0 success, 2 validation error, 3 numeric failure, 4 I/O error.

pub mod commands;
pub mod config;
pub mod output;
pub mod reproduce;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{KernelCase, Overrides, RunConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Numeric(_) => "numeric",
            CliError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tumordde", version, about = "Delayed tumor-immune model: stability, Hopf points, normal forms, simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibria, stability bounds and characteristic roots for the given lags
    Analyze(CommonArgs),
    /// Certified purely imaginary crossings as tau1 varies
    Hopf(CommonArgs),
    /// Center-manifold normal form at the first crossing
    Normalform(CommonArgs),
    /// Integrate the delay system and write CSV and SVG output
    Simulate(CommonArgs),
    /// Compare computed values with the built-in reference values
    ReproducePaper(CommonArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// TOML (or JSON) configuration file
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory for written files
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Print one JSON object instead of text
    #[arg(long)]
    pub json: bool,
    /// Use the literal typeset chain system (lag on y instead of x)
    #[arg(long)]
    pub as_printed: bool,
    /// Drop every nonlinear term from the normal-form computation
    #[arg(long)]
    pub zero_nonlinear: bool,
    #[arg(long)]
    pub a1: Option<f64>,
    #[arg(long)]
    pub a2: Option<f64>,
    #[arg(long)]
    pub b1: Option<f64>,
    #[arg(long)]
    pub b2: Option<f64>,
    #[arg(long)]
    pub b3: Option<f64>,
    #[arg(long)]
    pub b4: Option<f64>,
    /// Point lag on x
    #[arg(long)]
    pub tau1: Option<f64>,
    /// Point lag on y
    #[arg(long, conflicts_with = "q2")]
    pub tau2: Option<f64>,
    /// Weak-kernel rate on y
    #[arg(long)]
    pub q2: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Constant offset of the history from L0
    #[arg(long)]
    pub delta: Option<f64>,
    /// Write every n-th sample to CSV
    #[arg(long)]
    pub stride: Option<usize>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            a1: self.a1,
            a2: self.a2,
            b1: self.b1,
            b2: self.b2,
            b3: self.b3,
            b4: self.b4,
            tau1: self.tau1,
            tau2: self.tau2,
            q2: self.q2,
            dt: self.dt,
            t_end: self.t_end,
            delta: self.delta,
            stride: self.stride,
            as_printed: self.as_printed,
            zero_nonlinear: self.zero_nonlinear,
        }
    }

    /// File values, then flag overrides.
    pub fn load_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(&self.overrides());
        Ok(cfg)
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Hopf(_) => "hopf",
            Command::Normalform(_) => "normalform",
            Command::Simulate(_) => "simulate",
            Command::ReproducePaper(_) => "reproduce-paper",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Analyze(a) | Command::Hopf(a) | Command::Normalform(a) | Command::Simulate(a) | Command::ReproducePaper(a) => a,
        }
    }
}

/// Runs a parsed command, writing to `stdout`/`stderr`, and returns the
/// exit status.
pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32 {
    let args = cli.command.args();
    let name = cli.command.name();
    let result = args.load_config().and_then(|cfg| {
        let outcome = match &cli.command {
            Command::Analyze(_) => commands::cmd_analyze(&cfg),
            Command::Hopf(_) => commands::cmd_hopf(&cfg),
            Command::Normalform(_) => commands::cmd_normalform(&cfg),
            Command::Simulate(a) => {
                let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("out"));
                commands::cmd_simulate(&cfg, &dir)
            }
            Command::ReproducePaper(a) => commands::cmd_reproduce_paper(&cfg, a.out.as_deref()),
        }?;
        Ok((cfg, outcome))
    });
    match result {
        Ok((cfg, outcome)) => {
            let written = if args.json {
                let env = serde_json::json!({
                    "tool": "tumordde",
                    "version": crate::VERSION,
                    "command": name,
                    "config": cfg,
                    "result": outcome.json,
                });
                writeln!(stdout, "{}", serde_json::to_string_pretty(&env).expect("output serializes"))
            } else {
                write!(stdout, "{}", outcome.text)
            };
            if written.is_err() {
                return CliError::Io("stdout".into()).code();
            }
            outcome.status
        }
        Err(e) => {
            if args.json {
                let env = serde_json::json!({
                    "tool": "tumordde",
                    "version": crate::VERSION,
                    "command": name,
                    "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": e.code() },
                });
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&env).expect("output serializes"));
            }
            let _ = writeln!(stderr, "tumordde {name}: {e}");
            e.code()
        }
    }
}
