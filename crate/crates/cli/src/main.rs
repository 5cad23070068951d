//! `vclab` command-line front end.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Format, Output};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "vclab",
    version,
    about = "Complexity bounds, shattering verification and learning experiments for band-limited linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for randomized commands; overrides a `seed` field in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate bound formulas on one point or a grid.
    Bounds(Common),
    /// Run a shattering construction or estimator.
    Verify(Common),
    /// Evaluate a system response and its sign observation.
    Respond {
        #[command(flatten)]
        common: Common,
        /// Controls document with a `G` field; defaults to `G` in the system file.
        #[arg(long)]
        controls: Option<PathBuf>,
        /// Horizon; defaults to `tau` in the controls or system file, then 1.
        #[arg(long)]
        tau: Option<f64>,
        /// Cross-check against adaptive quadrature.
        #[arg(long)]
        oracle: bool,
    },
    /// Run the learning experiment.
    Learn(Common),
    /// Run the internal consistency suite.
    Selftest {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Relative error injected into closed-form values (harness hook).
        #[arg(long, hide = true, default_value_t = 0.0)]
        inject_perturbation: f64,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn config_text(common: &Common) -> Result<String, CliError> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| CliError::Invalid("--config is required".into()))?;
    read(path)
}

fn emit(output: &Output, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, &output.text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(output.text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io {
                    path: "<stdout>".into(),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (output, out) = match &cli.command {
        Command::Bounds(c) => (commands::cmd_bounds(&config_text(c)?, c.format)?, c.out.as_deref()),
        Command::Verify(c) => (
            commands::cmd_verify(&config_text(c)?, c.seed, c.format)?,
            c.out.as_deref(),
        ),
        Command::Respond {
            common,
            controls,
            tau,
            oracle,
        } => {
            let controls = controls.as_deref().map(read).transpose()?;
            (
                commands::cmd_respond(&config_text(common)?, controls.as_deref(), *tau, *oracle, common.format)?,
                common.out.as_deref(),
            )
        }
        Command::Learn(c) => (
            commands::cmd_learn(&config_text(c)?, c.seed, c.format)?,
            c.out.as_deref(),
        ),
        Command::Selftest {
            out,
            inject_perturbation,
        } => (commands::cmd_selftest(*inject_perturbation)?, out.as_deref()),
    };
    emit(&output, out)?;
    Ok(output.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::EXIT_INVALID as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
