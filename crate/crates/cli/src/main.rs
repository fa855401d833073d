//! `cnc`: simulate cyclic networks with convolutional codes, initialize sinks
//! from pilot transmissions, decode, and report achievable rates.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cnc_core::Error;

#[derive(Parser, Debug)]
#[command(name = "cnc", version, about = "Blind initialization of convolutional network codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fill every missing local kernel with seeded random field elements.
    GenKernels(commands::GenKernelsArgs),
    /// Run the network and record what each sink receives.
    Simulate(commands::SimulateArgs),
    /// Send pilots and derive each sink's difference equation.
    Init(commands::InitArgs),
    /// Recover the source streams from a received trace.
    Decode(commands::DecodeArgs),
    /// List the achievable source-rate tuples.
    Capacity(commands::CapacityArgs),
}

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_UNDECODABLE: u8 = 4;
pub const EXIT_RANK_DEFICIENT: u8 = 5;
pub const EXIT_INIT_FAILURE: u8 = 6;
pub const EXIT_NEEDS_MORE: u8 = 7;

/// Bad flag combinations that clap cannot express.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::Parse(_)
            | Error::FieldMismatch { .. }
            | Error::DimensionMismatch(_)
            | Error::InvalidFieldSpec(_)
            | Error::NotAField { .. }
            | Error::ElementOutOfRange { .. }
            | Error::SequenceUndefined(_)
            | Error::Topology(_),
        ) => EXIT_PARSE,
        Some(Error::Undecodable { .. }) => EXIT_UNDECODABLE,
        Some(Error::NotFullColumnRank { .. }) => EXIT_RANK_DEFICIENT,
        Some(Error::InitializationFailure { .. }) => EXIT_INIT_FAILURE,
        Some(Error::NeedsMoreSymbols { .. }) => EXIT_NEEDS_MORE,
        _ => EXIT_OTHER,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenKernels(a) => commands::gen_kernels(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Init(a) => commands::init(&a),
        Command::Decode(a) => commands::decode(&a),
        Command::Capacity(a) => commands::capacity(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
