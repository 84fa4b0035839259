use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dipole_phase_cli::config::SweepDoc;
use dipole_phase_cli::{execute, CliError, Command, OutputFormat, Overrides, Suite};

#[derive(Parser)]
#[command(
    name = "dipole-phase",
    version,
    about = "Geometric phases and dynamics of dipolar particles"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON configuration file
    #[arg(short = 'c', long = "config", global = true)]
    config: Option<PathBuf>,

    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, global = true)]
    format: Option<OutputFormat>,

    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Geometric phase along the configured path
    Phase,
    /// Force, canonical momentum and potential energy at the configured state
    Force,
    /// Torque at the configured state
    Torque,
    /// RK4 trajectory from the configured state
    Trajectory,
    /// Two-arm phase difference and fringe intensity
    Interfere,
    /// Phase over a range of one configuration value
    Sweep {
        /// Dotted key of the value to vary, e.g. `field.lambda_e`
        #[arg(long, requires_all = ["from", "to", "steps"])]
        param: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "param")]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "param")]
        to: Option<f64>,
        #[arg(long, requires = "param")]
        steps: Option<usize>,
    },
    /// Seeded validation suites
    Check {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match real_main(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn real_main(cli: Cli) -> Result<u8, CliError> {
    let mut overrides = Overrides {
        format: cli.format,
        seed: cli.seed,
        ..Default::default()
    };
    let command = match cli.command {
        Cmd::Phase => Command::Phase,
        Cmd::Force => Command::Force,
        Cmd::Torque => Command::Torque,
        Cmd::Trajectory => Command::Trajectory,
        Cmd::Interfere => Command::Interfere,
        Cmd::Sweep { param, from, to, steps } => {
            if let (Some(param), Some(from), Some(to), Some(steps)) = (param, from, to, steps) {
                overrides.sweep = Some(SweepDoc { param, from, to, steps });
            }
            Command::Sweep
        }
        Cmd::Check { suite } => {
            overrides.suite = suite;
            Command::Check
        }
    };

    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?,
        None if command == Command::Check => "{}".to_string(),
        None => {
            return Err(CliError::Schema {
                key: "--config".into(),
                message: format!("the `{}` command needs a configuration file", command.name()),
            })
        }
    };

    let outcome = execute(&text, command, &overrides)?;
    match &cli.out {
        Some(path) => std::fs::write(path, &outcome.output)?,
        None => print!("{}", outcome.output),
    }
    if let Some(msg) = &outcome.diagnostic {
        eprintln!("error: {msg}");
    }
    Ok(outcome.exit_code as u8)
}
