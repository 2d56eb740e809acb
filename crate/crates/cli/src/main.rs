use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};
use ldprice::{emit_series, load_scenario, render_report, run, RunError, RunRequest};
use ldprice_core::{builtin_case_study, Mechanism};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MechanismArg {
    Spot,
    Duration,
    Both,
}

/// Dispatch a scenario and settle it under spot and load-duration pricing.
#[derive(Debug, Parser)]
#[command(name = "ldprice", version)]
#[command(group(ArgGroup::new("input").required(true).args(["scenario", "case_study"])))]
struct Cli {
    /// Scenario file (JSON).
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Run the built-in three-plant case study.
    #[arg(long)]
    case_study: bool,
    /// Defaults to the scenario's `options.mechanisms`.
    #[arg(long, value_enum)]
    mechanism: Option<MechanismArg>,
    /// Quadrature panels (even); overrides `options.grid_n`.
    #[arg(long, value_name = "N")]
    grid_n: Option<usize>,
    /// Write timeseries.csv, duration.csv and settlement.csv here.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Fall back to bound-clamped dispatch when the unconstrained one is infeasible.
    #[arg(long)]
    allow_clamp: bool,
    /// Do not print the report.
    #[arg(long)]
    quiet: bool,
}

fn execute(cli: &Cli) -> Result<String, RunError> {
    let scenario = match &cli.scenario {
        Some(path) => load_scenario(path)?,
        None => builtin_case_study(),
    };
    let req = RunRequest {
        mechanisms: cli.mechanism.map(|m| match m {
            MechanismArg::Spot => vec![Mechanism::Spot],
            MechanismArg::Duration => vec![Mechanism::Duration],
            MechanismArg::Both => vec![Mechanism::Spot, Mechanism::Duration],
        }),
        grid_n: cli.grid_n,
        allow_clamp: cli.allow_clamp,
    };
    let out = run(&scenario, &req)?;
    if let Some(dir) = &cli.out_dir {
        emit_series(&out, dir)?;
    }
    Ok(render_report(&out))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            if !cli.quiet {
                print!("{report}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            for line in e.lines() {
                eprintln!("{line}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
