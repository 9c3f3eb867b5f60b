use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use hetsis::detdyn::{has_import, leading_eigenvalue, r0, solve_steady_states};
use hetsis::expctl::{read_csv, run_experiment, ExperimentSpec, FieldsFile};
use hetsis::stochsim::Execution;
use hetsis::warnsign::fit_power_law;
use hetsis::{HetsisError, Result};

#[derive(Parser)]
#[command(name = "hetsis", version, about = "Heterogeneous SIS models and variance early-warning fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML spec file.
    Run {
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Schedule path batches on one thread (results are identical).
        #[arg(long)]
        serial: bool,
    },
    /// Fit A/(t_crit - t)^alpha to a variance series in a CSV file.
    Fit {
        csv: PathBuf,
        #[arg(long = "tcrit")]
        t_crit: f64,
        #[arg(long, default_value_t = 0.9)]
        fraction: f64,
        #[arg(long, default_value = "t")]
        time_column: String,
        #[arg(long, default_value = "variance")]
        var_column: String,
    },
    /// Steady states, R0 and leading eigenvalue of a fields file.
    Steady { fields: PathBuf },
    /// R0 of a fields file.
    R0 { fields: PathBuf },
}

fn execute(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Run {
            spec,
            seed,
            paths,
            out,
            serial,
        } => {
            let mut spec = ExperimentSpec::load(&spec)?;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            if let Some(paths) = paths {
                spec.sim.paths = paths;
            }
            if let Some(out) = out {
                spec.output_dir = out;
            }
            if serial {
                spec.sim.execution = Execution::Serial;
            }
            let record = run_experiment(&spec)?;
            Ok(serde_json::to_value(record).expect("manifest serializes"))
        }
        Command::Fit {
            csv,
            t_crit,
            fraction,
            time_column,
            var_column,
        } => {
            let table = read_csv(&csv)?;
            let column = |name: &str| {
                table
                    .column(name)
                    .ok_or_else(|| HetsisError::Config(format!("{}: no column {name:?}", csv.display())))
            };
            let fit = fit_power_law(column(&time_column)?, column(&var_column)?, t_crit, fraction)?;
            Ok(serde_json::to_value(fit).expect("fit serializes"))
        }
        Command::Steady { fields } => {
            let (space, fields) = FieldsFile::load(&fields)?.resolve()?;
            Ok(json!({
                "r0": r0(&space, &fields)?,
                "has_import": has_import(&space, &fields),
                "leading_eigenvalue": leading_eigenvalue(&space, &fields)?,
                "steady_states": solve_steady_states(&space, &fields)?,
            }))
        }
        Command::R0 { fields } => {
            let (space, fields) = FieldsFile::load(&fields)?.resolve()?;
            Ok(json!({ "r0": r0(&space, &fields)? }))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(value) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("json output"));
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
