mod args;
mod commands;
mod error;
mod record;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use condent::model::SystemSpec;

use args::{Cli, Command, Format};
use error::CliError;
use record::{Cell, RunResult};

fn execute(command: &Command, system: Option<&SystemSpec>) -> Result<RunResult, CliError> {
    match command {
        Command::Distribution(a) => commands::distribution(a, system),
        Command::Mean(a) => commands::mean(a, system),
        Command::Tau(a) => commands::tau(a),
        Command::Verify(a) => commands::verify(a),
        Command::Oracle(a) => commands::oracle(a, system),
        Command::Tomography(a) => commands::tomography(a, system),
        Command::Rerun(_) => unreachable!("rerun is resolved before execution"),
    }
}

fn load_config(path: &Path) -> Result<SystemSpec, CliError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    condent::config::parse_system(&src).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn print_checks(result: &RunResult) {
    for row in &result.tables[0].rows {
        let text = |k: usize| match &row[k] {
            Cell::Text(s) => s.clone(),
            Cell::Number(x) => format!("{x:.3e}"),
            Cell::Missing => String::new(),
        };
        let verdict = if text(4) == "true" { "PASS" } else { "FAIL" };
        println!("{verdict} {:<12} {:<40} residual {} (tolerance {})", text(0), text(1), text(2), text(3));
    }
}

fn run(cli: Cli) -> Result<Option<bool>, CliError> {
    let (command, system) = match cli.command {
        Command::Rerun(r) => {
            let record = record::load_record(&r.manifest)?;
            let mut command = record.parameters;
            if let Some(out) = command.output_mut() {
                out.out = r.out;
            }
            let system = match record.system {
                Some(v) => Some(condent::config::parse_system(&v.to_string())?),
                None => None,
            };
            (command, system)
        }
        command => {
            let system = command.config_path().map(|p| load_config(p)).transpose()?;
            (command, system)
        }
    };
    let result = execute(&command, system.as_ref())?;
    let output = command.output().expect("every runnable command has output options");
    let system_json = system.as_ref().map(condent::config::system_to_json);
    let written = if let Command::Verify(_) = command {
        print_checks(&result);
        // Verification reports are always JSON.
        match output.out.as_deref() {
            Some(dir) => record::emit(&command, system_json, &result, Format::Json, Some(dir))?,
            None => None,
        }
    } else {
        record::emit(&command, system_json, &result, output.format, output.out.as_deref())?
    };
    if let Some(path) = written {
        eprintln!("wrote {}", path.display());
    }
    Ok(result.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Some(false)) => {
            eprintln!("verification failed");
            ExitCode::from(3)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
