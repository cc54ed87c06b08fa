//! Command-line front end for `asymkde`: estimation, bandwidth selection,
//! simulation and the verification suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod output;
pub mod verify;

use config::{Cli, Command, OutputArgs};
use error::{CliError, CliResult};
use output::Format;

/// Rendered output of a command, plus the error to report once the output
/// has been written (a failed verification still emits its table).
pub struct Run {
    pub bytes: Vec<u8>,
    pub error: Option<CliError>,
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> CliResult<Run> {
    let (table, error) = match &cli.command {
        Command::Estimate(a) => {
            let samples = input::read_samples(a.input.as_deref())?;
            let opts = commands::EstimateOptions {
                family: a.kernel.kernel,
                role: a.kernel.role,
                bandwidth: a.bandwidth,
                grid: a.grid,
            };
            (commands::estimate(samples, &opts)?, None)
        }
        Command::Bandwidth(a) => {
            let samples = input::read_samples(a.input.as_deref())?;
            (commands::bandwidth(&samples, a)?, None)
        }
        Command::Simulate(a) => (commands::simulate(a)?, None),
        Command::Verify(a) => {
            let cfg = verify::VerifyConfig {
                quick: a.quick,
                seed: a.seed,
                tolerance_scale: a.tolerance_scale,
            };
            let outcomes = verify::run_all(&cfg);
            for o in &outcomes {
                eprintln!("{}", o.line());
            }
            let failed: Vec<String> = outcomes
                .iter()
                .filter(|o| !o.passed)
                .map(|o| o.id.to_string())
                .collect();
            let error = (!failed.is_empty())
                .then(|| CliError::Failed(format!("criteria failed: {}", failed.join(", "))));
            (verify::report(&outcomes, &cfg), error)
        }
    };
    let format: Format = output_args(cli).format.into();
    Ok(Run {
        bytes: table.render(format)?,
        error,
    })
}

pub fn output_args(cli: &Cli) -> &OutputArgs {
    match &cli.command {
        Command::Estimate(a) => &a.output,
        Command::Bandwidth(a) => &a.output,
        Command::Simulate(a) => &a.output,
        Command::Verify(a) => &a.output,
    }
}
