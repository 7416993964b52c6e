// Copyright 2026 The qlga-opt developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlga_cli::commands::{
    cmd_estimate, cmd_minfind, cmd_oracle, cmd_resources, cmd_simulate, Overrides,
};
use qlga_cli::config::parse_config;
use qlga_cli::CliError;

/// Parallel lattice-gas evolution, amplitude estimation, and quantum
/// minimum finding over candidate lattice configurations.
#[derive(Parser)]
#[command(name = "qlga", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve all configurations and emit per-marker quantity distributions.
    Simulate(RunArgs),
    /// Emit the joint marker/estimation distribution with error-bound flags.
    Estimate(RunArgs),
    /// Run the threshold-tracking minimum finder and report the winner.
    Minfind(RunArgs),
    /// Print structural gate counts and the evaluated cost terms.
    Resources(RunArgs),
    /// Emit exact expectations, classical enumeration, and the gap report.
    Oracle(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the CSV payload here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the simulable-qubit cap.
    #[arg(long)]
    max_qubits: Option<usize>,
}

fn emit(csv: String, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let args = match &cli.command {
        Command::Simulate(a)
        | Command::Estimate(a)
        | Command::Minfind(a)
        | Command::Resources(a)
        | Command::Oracle(a) => a,
    };
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Validation(format!("reading {}: {e}", args.config.display())))?;
    let config = parse_config(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", args.config.display())))?;
    let overrides = Overrides {
        seed: args.seed,
        max_qubits: args.max_qubits,
    };
    match &cli.command {
        Command::Simulate(a) => emit(cmd_simulate(&config, overrides)?, &a.out),
        Command::Estimate(a) => emit(cmd_estimate(&config, overrides)?, &a.out),
        Command::Minfind(a) => emit(cmd_minfind(&config, overrides)?, &a.out),
        Command::Resources(a) => {
            let (text, csv) = cmd_resources(&config, overrides)?;
            print!("{text}");
            match &a.out {
                Some(path) => emit(csv, &a.out.clone()).map(|()| {
                    let _ = path;
                }),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        Command::Oracle(a) => emit(cmd_oracle(&config, overrides)?, &a.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
