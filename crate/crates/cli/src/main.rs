use std::io::Write;
use std::process::ExitCode;

use asymkde_cli::config::Cli;
use asymkde_cli::error::CliError;
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = asymkde_cli::run(&cli).and_then(|run| {
        match &asymkde_cli::output_args(&cli).out {
            Some(path) => std::fs::write(path, &run.bytes)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?,
            None => std::io::stdout().write_all(&run.bytes)?,
        }
        run.error.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("asymkde: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
