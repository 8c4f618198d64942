mod args;
mod commands;
mod output;

use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Precision};
use commands::{Failure, ProblemSpec};
use hill_spps::TwoFloat;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let spec = ProblemSpec::from_global(&cli.global)?;
    let report = match cli.global.precision {
        Precision::Double => commands::execute::<f64>(cli, &spec)?,
        Precision::DoubleDouble => commands::execute::<TwoFloat>(cli, &spec)?,
    };
    for w in &report.warnings {
        eprintln!("{w}");
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let written = if cli.global.json {
        report.table.write_json(&mut out)
    } else {
        report.table.write_csv(&mut out)
    };
    written
        .and_then(|_| out.flush())
        .or_else(|e| match e.kind() {
            io::ErrorKind::BrokenPipe => Ok(()),
            _ => Err(Failure::Usage(format!("write failed: {e}"))),
        })?;
    match report.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}
