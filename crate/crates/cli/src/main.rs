use std::path::PathBuf;
use std::process::ExitCode;

use afdm_cli::{run, RunOptions, Subcommand};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Bit-error-rate sweep over the configured SNR list.
    Ber,
    /// Nonzero entries of the effective channel matrix.
    Effchan,
    /// Matched-filter range-Doppler map of one frame.
    Sense,
    /// Measured versus predicted chirp frequency shift over a grid.
    Shift,
    /// Path separation as the chirp rate c1 grows.
    #[value(name = "sweep-c1")]
    SweepC1,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Ber => Subcommand::Ber,
            Command::Effchan => Subcommand::Effchan,
            Command::Sense => Subcommand::Sense,
            Command::Shift => Subcommand::Shift,
            Command::SweepC1 => Subcommand::SweepC1,
        }
    }
}

/// Chirp multicarrier (AFDM/OFDM/OCDM) experiment runner.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the experiment file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for trial execution.
    #[arg(long, env = "AFL_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let opts = RunOptions {
        config: args.config,
        out: args.out,
        seed: args.seed,
        threads: args.threads,
    };
    match run(args.command.into(), &opts) {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
