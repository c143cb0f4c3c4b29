//! `gpcb`: build codes, calibrate confidence tables and run BER sweeps.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<gpcb_core::Error> for CliError {
    fn from(e: gpcb_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gpcb",
    version,
    about = "GPCB code construction, calibration and BER simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// TOML run configuration.
    #[arg(short, long)]
    config: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WordFormat {
    Bin,
    Hex,
}

#[derive(Debug, Args)]
struct WordIo {
    /// One word per line; `-` reads stdin.
    #[arg(short, long, default_value = "-")]
    input: PathBuf,
    /// Defaults to stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "bin")]
    format: WordFormat,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the registered component codes.
    Codes,
    /// Print the Shannon limits for a code rate (e.g. 0.68 or 51/75).
    Limits {
        #[arg(long)]
        rate: String,
    },
    /// Calibrate and store the confidence tables a configuration needs.
    Calibrate {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Recalibrate even if a stored table matches.
        #[arg(long)]
        force: bool,
    },
    /// BER at a single Eb/N0.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Overrides the configured Eb/N0 list.
        #[arg(long, allow_negative_numbers = true)]
        ebn0: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// BER over the configured Eb/N0 list.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Encode message words.
    Encode {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        io: WordIo,
    },
    /// Decode received words: bit lines (noiseless) or comma-separated reals.
    Decode {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        io: WordIo,
        /// Noise standard deviation of real-valued input.
        #[arg(long, conflicts_with = "ebn0")]
        sigma: Option<f64>,
        /// Eb/N0 of real-valued input, converted with the code rate.
        #[arg(long, allow_negative_numbers = true)]
        ebn0: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    use commands as c;
    match cli.command {
        Command::Codes => c::codes(),
        Command::Limits { rate } => c::limits(&rate),
        Command::Calibrate { cfg, force } => c::calibrate(&cfg.config, force),
        Command::Simulate { cfg, ebn0, output } => c::simulate(&cfg.config, ebn0, output),
        Command::Sweep { cfg, output } => c::sweep(&cfg.config, output),
        Command::Encode { cfg, io } => {
            c::encode(&cfg.config, &io.input, io.output.as_deref(), io.format)
        }
        Command::Decode {
            cfg,
            io,
            sigma,
            ebn0,
        } => c::decode(
            &cfg.config,
            &io.input,
            io.output.as_deref(),
            io.format,
            sigma,
            ebn0,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gpcb: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
