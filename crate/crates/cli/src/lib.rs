//! Command-line front end: scenario files in, reports and exit codes out.

pub mod commands;
pub mod config;
pub mod tolerances;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use holoform::report::Report;
use holoform::torus_morita::{Mode, SkewTheta};

pub use commands::{cmd_check, cmd_dim, cmd_omega, cmd_selftest, cmd_torus_morita, cmd_validate, Run, Which};
pub use config::ScenarioConfig;
pub use tolerances::Tolerances;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Debug, Parser)]
#[command(name = "holoform", version, about = "Symplectic forms on moduli of flat connections over colored surfaces")]
struct Cli {
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = tolerances::parse_override, global = true)]
    tol: Vec<(String, f64)>,
    #[arg(long, value_enum, global = true)]
    mode: Option<ModeArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corner transversality, Lagrangian arcs, cut pairing.
    Validate,
    /// Dimension formula against the numerical tangent rank.
    Dim,
    /// Gram matrices of ω, with the closed-form oracle where one exists.
    Omega,
    /// One of the structural checks.
    Check {
        #[arg(value_enum)]
        which: Which,
    },
    /// Jacobi, metric invariance and Lagrangian certificates of the backends.
    Selftest,
    /// Exact torus pipeline for θ ↔ θ⁻¹.
    TorusMorita {
        /// θ as a JSON matrix, e.g. '[[0,"1/2"],["-1/2",0]]'.
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        planck: Option<String>,
    },
}

/// Parse arguments, run, print. Returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{e}");
            return EXIT_PASS;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            if let Err(e) = emit(&report, cli.json.as_ref(), out) {
                let _ = writeln!(err, "internal error: {e}");
                return EXIT_INTERNAL;
            }
            if report.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let config = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            ScenarioConfig::from_json(&text)?
        }
        None => ScenarioConfig::default(),
    };
    let scale = match std::env::var(tolerances::ENV_SCALE) {
        Ok(s) => Some(s.trim().parse::<f64>().map_err(|_| CliError::Config(format!("{}=`{s}` is not a number", tolerances::ENV_SCALE)))?),
        Err(_) => None,
    };
    let tol = Tolerances::resolve(scale, &config.tolerances, &cli.tol)?;
    let mode = cli.mode.map(|m| match m {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Float => Mode::Float,
    });
    let run = Run::new(config, cli.seed, tol, mode)?;
    match &cli.command {
        Command::Validate => cmd_validate(&run),
        Command::Dim => cmd_dim(&run),
        Command::Omega => cmd_omega(&run),
        Command::Check { which } => cmd_check(&run, *which),
        Command::Selftest => cmd_selftest(&run),
        Command::TorusMorita { theta, planck } => {
            // θ is exact unless float mode is asked for
            let mode = mode.or(run.config.mode).unwrap_or(Mode::Exact);
            let run = Run { mode, ..run };
            let theta = match theta {
                Some(text) => parse_theta(text, mode)?,
                None => run.config.theta(mode)?.ok_or_else(|| CliError::Config("torus-morita needs --theta or `theta` in the config".into()))?,
            };
            let planck = planck.clone().or_else(|| run.config.planck.as_ref().map(|p| p.text())).unwrap_or_else(|| "1".into());
            cmd_torus_morita(&run, &theta, &planck)
        }
    }
}

/// θ from a JSON matrix of strings or numbers.
pub fn parse_theta(text: &str, mode: Mode) -> Result<SkewTheta, CliError> {
    let rows: Vec<Vec<config::Entry>> = serde_json::from_str(text).map_err(|e| CliError::Config(format!("theta: {e}")))?;
    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(config::Entry::text).collect()).collect();
    SkewTheta::parse(&rows, mode).map_err(|e| CliError::Config(e.to_string()))
}

fn emit(report: &Report, json: Option<&PathBuf>, out: &mut dyn Write) -> std::io::Result<()> {
    let text = report.to_json();
    match json {
        Some(p) if p.as_os_str() == "-" => return writeln!(out, "{text}"),
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => {}
    }
    for c in &report.checks {
        writeln!(out, "{} {}  residual={:e} tol={:e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.residual, c.tolerance)?;
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    writeln!(out, "{}: {} checks, {} failed", report.scenario, report.checks.len(), failed)?;
    if let Some(v) = report.data.get("validation") {
        for entry in v.as_array().into_iter().flatten() {
            for p in entry["problems"].as_array().into_iter().flatten() {
                writeln!(out, "  problem: {}", p.as_str().unwrap_or_default())?;
            }
        }
    }
    Ok(())
}
