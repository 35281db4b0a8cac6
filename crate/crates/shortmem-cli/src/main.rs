//! Batch experiment driver: `shortmem <command> <config> [--threads N]`.

mod commands;
mod config;

use std::process::ExitCode;

use commands::{dispatch, CliError, Command};
use config::SimConfig;

const USAGE: &str = "usage: shortmem <command> <config-file> [--threads N]
commands: simulate | couple | counterexample | variance | weighted | coboundary | diagnose";

fn run() -> Result<(), CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut positional = Vec::new();
    let mut threads: Option<usize> = None;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        if arg == "--threads" {
            let v = it.next().ok_or_else(|| CliError::Usage("--threads needs a value".into()))?;
            threads = Some(
                v.parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad thread count `{v}`")))?,
            );
        } else if arg == "--help" || arg == "-h" {
            println!("{USAGE}");
            return Ok(());
        } else {
            positional.push(arg.clone());
        }
    }
    if positional.len() != 2 {
        return Err(CliError::Usage(USAGE.into()));
    }
    let command = Command::parse(&positional[0])
        .ok_or_else(|| CliError::Usage(format!("unknown command `{}`\n{USAGE}", positional[0])))?;
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        // worker count never changes outputs; cells merge in index order
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let text = std::fs::read_to_string(&positional[1])?;
    let cfg = SimConfig::parse(&text)?;
    let written = dispatch(command, &cfg)?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
