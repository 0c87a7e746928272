//! Batch CLI for the foveated image transform, fixation utilities and the
//! randomized-smoothing certifier.

pub mod commands;
pub mod config;
pub mod error;
pub mod imgio;
pub mod specs;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "rblur",
    about = "Foveated image transform, scanpath utilities and a randomized-smoothing certifier",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply the foveation pipeline to images
    Apply(commands::apply::ApplyArgs),
    /// Dump the quantized acuity table (and optionally render it)
    AcuityMap(commands::acuity_map::AcuityMapArgs),
    /// Sample a scanpath from a saliency heatmap
    Scanpath(commands::scanpath::ScanpathArgs),
    /// Certify a classifier over a dataset manifest
    Certify(commands::certify::CertifyArgs),
    /// Grid-sweep pipeline parameters and report metrics
    Sweep(commands::sweep::SweepArgs),
}

/// Parse arguments and run. Exit codes: 0 success, 1 usage error, 2 data
/// error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Apply(args) => commands::apply::run(args),
        Command::AcuityMap(args) => commands::acuity_map::run(args),
        Command::Scanpath(args) => commands::scanpath::run(args),
        Command::Certify(args) => commands::certify::run(args),
        Command::Sweep(args) => commands::sweep::run(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rblur: {e}");
            e.exit_code()
        }
    }
}
