//! epimine: mine significant activity intervals and frequent multi-entity
//! episodes from entity access logs.
//!
//! The pipeline is clean -> fold -> si/allsi -> fed, with gen, sweep and
//! contrib as experiment drivers. Exit codes: 0 success, 1 usage or
//! configuration error, 2 data or parse error.

mod commands;
mod config;
mod manifest;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::{
    AllsiArgs, CleanArgs, ContribArgs, FedArgs, Failure, FoldArgs, GenArgs, SiArgs, SweepArgs,
};

#[derive(Parser, Debug)]
#[command(
    name = "epimine",
    version,
    about = "Mine significant activity intervals and frequent multi-entity episodes from access logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Keep only access rows and split the log per entity.
    Clean(CleanArgs),
    /// Fold cleaned records into per-offset access counts.
    Fold(FoldArgs),
    /// Discover minimal significant intervals under a span cap.
    Si(SiArgs),
    /// Discover minimal significant intervals without a span cap.
    Allsi(AllsiArgs),
    /// Mine frequent episodes from significant intervals.
    Fed(FedArgs),
    /// Generate a seeded synthetic access log.
    Gen(GenArgs),
    /// Sweep one mining parameter and count results.
    Sweep(SweepArgs),
    /// Report per-entity episode participation by month.
    Contrib(ContribArgs),
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Clean(args) => commands::clean(args.resolve()?),
        Command::Fold(args) => commands::fold(args.resolve()?),
        Command::Si(args) => commands::si(args.resolve()?),
        Command::Allsi(args) => commands::allsi(args.resolve()?),
        Command::Fed(args) => commands::fed_cmd(args.resolve()?),
        Command::Gen(args) => commands::generate(args.resolve()?),
        Command::Sweep(args) => commands::sweep(args.resolve()?),
        Command::Contrib(args) => commands::contrib(args.resolve()?),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            err.print().expect("cannot write to stderr");
            std::process::exit(code);
        }
    };
    if let Err(failure) = run(cli.command) {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}
