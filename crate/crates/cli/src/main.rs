//! `hardy-rellich` command-line front-end.
//!
//! Exit codes: 0 success, 1 inequality violation, 2 configuration error,
//! 3 precondition of the inequality not satisfied.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardy_rellich::optimizer::Functional;

use config::Overrides;

#[derive(Debug)]
pub enum CliError {
    Config(String),
}

#[derive(Parser)]
#[command(name = "hardy-rellich", version, about = "Weighted Hardy and Rellich inequalities on complements of convex sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form constants and optimality status.
    Constants {
        #[command(flatten)]
        common: Common,
        /// Treat the request as a Rellich one: exponents outside [0,2) become errors.
        #[arg(long, value_enum)]
        functional: Option<Which>,
    },
    /// Check the Hardy inequality on the trial families.
    VerifyHardy {
        #[command(flatten)]
        common: Common,
        /// Inflate the lower bound to check that violations are detected.
        #[arg(long)]
        expect_fail: bool,
    },
    /// Check the Rellich inequality on the trial families.
    VerifyRellich {
        #[command(flatten)]
        common: Common,
        /// Inflate the lower bound to check that violations are detected.
        #[arg(long)]
        expect_fail: bool,
    },
    /// Lower and upper bounds for the optimal constant.
    Bracket {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        functional: Option<Which>,
    },
    /// Dimensions of the body and randomised distance checks.
    Geometry {
        #[command(flatten)]
        common: Common,
    },
    /// Quotients along a trial sequence with the extrapolated limit.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        functional: Option<Which>,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Problem spec or experiment config (JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// JSON array of specs or configs.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Directory that receives `<command>.json` or `<command>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Monte Carlo and geometry sample count.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Hardy,
    Rellich,
}

impl From<Which> for Functional {
    fn from(w: Which) -> Self {
        match w {
            Which::Hardy => Functional::Hardy,
            Which::Rellich => Functional::Rellich,
        }
    }
}

fn emit(name: &str, common: &Common, report: &commands::Report) -> Result<(), CliError> {
    let (text, ext) = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json(name)).map_err(|e| CliError::Config(e.to_string()))?;
            s.push('\n');
            (s, "json")
        }
        Format::Csv => (report.csv.clone(), "csv"),
    };
    print!("{text}");
    if let Some(dir) = &common.out {
        write_out(dir, &format!("{name}.{ext}"), &text)?;
    }
    Ok(())
}

fn write_out(dir: &Path, file: &str, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(file);
    std::fs::write(&path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<commands::Report, CliError> {
    let (name, common, functional) = match &cli.command {
        Command::Constants { common, functional } => ("constants", common, functional.map(Functional::from)),
        Command::VerifyHardy { common, .. } => ("verify-hardy", common, Some(Functional::Hardy)),
        Command::VerifyRellich { common, .. } => ("verify-rellich", common, Some(Functional::Rellich)),
        Command::Bracket { common, functional } => ("bracket", common, functional.map(Functional::from)),
        Command::Geometry { common } => ("geometry", common, None),
        Command::Sweep { common, functional } => ("sweep", common, functional.map(Functional::from)),
    };
    let overrides = Overrides { seed: common.seed, tol: common.tol, samples: common.samples, functional };
    let configs = config::load(common.spec.as_deref(), common.grid.as_deref(), &overrides)?;
    let report = match &cli.command {
        Command::Constants { .. } => commands::constants(&configs)?,
        Command::VerifyHardy { expect_fail, .. } => commands::verify(&configs, Functional::Hardy, *expect_fail)?,
        Command::VerifyRellich { expect_fail, .. } => commands::verify(&configs, Functional::Rellich, *expect_fail)?,
        Command::Bracket { .. } => commands::bracket(&configs)?,
        Command::Geometry { .. } => commands::geometry(&configs)?,
        Command::Sweep { .. } => commands::sweep(&configs)?,
    };
    emit(name, common, &report)?;
    Ok(report)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            for v in &report.violations {
                eprintln!("violation: {v}");
            }
            for p in &report.preconditions {
                eprintln!("precondition: {p}");
            }
            if !report.violations.is_empty() {
                ExitCode::from(1)
            } else if !report.preconditions.is_empty() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
