//! `fwm`: command-line front door for the four-wave mixing library.
//!
//! Exit codes: 0 success, 1 domain error, 2 configuration error,
//! 3 verification failure.

mod commands;
mod config;
mod verify;

use clap::{Parser, Subcommand};

use config::{CliError, CommonOpts};

#[derive(Parser)]
#[command(
    name = "fwm",
    about = "Integrable four-wave mixing: sectors, spectra, dynamics and verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sector shape report: subcase, (N, gamma, delta), lambda0 and basis
    Sector(CommonOpts),
    /// Dual Hahn spectral table and sector energies
    Spectrum(CommonOpts),
    /// Transition probability |U_mn(t)|^2 over a time grid
    Transition(CommonOpts),
    /// Quantum evolution of a sector basis state over a time grid
    EvolveQuantum(CommonOpts),
    /// Closed-form classical reduced trajectory
    Classical(CommonOpts),
    /// Trajectory mapped onto the Kummer shape
    Kummer(CommonOpts),
    /// Reduced coherent state: coefficients, kernel and measure density
    Coherent(CommonOpts),
    /// Run the full invariant suite
    Verify(CommonOpts),
}

fn main() {
    let cli = Cli::parse();
    let run = || -> Result<i32, CliError> {
        match cli.command {
            Command::Sector(opts) => commands::cmd_sector(&opts.resolve()?).map(|_| 0),
            Command::Spectrum(opts) => commands::cmd_spectrum(&opts.resolve()?).map(|_| 0),
            Command::Transition(opts) => commands::cmd_transition(&opts.resolve()?).map(|_| 0),
            Command::EvolveQuantum(opts) => {
                commands::cmd_evolve_quantum(&opts.resolve()?).map(|_| 0)
            }
            Command::Classical(opts) => commands::cmd_classical(&opts.resolve()?).map(|_| 0),
            Command::Kummer(opts) => commands::cmd_kummer(&opts.resolve()?).map(|_| 0),
            Command::Coherent(opts) => commands::cmd_coherent(&opts.resolve()?).map(|_| 0),
            Command::Verify(opts) => verify::cmd_verify(&opts.resolve()?),
        }
    };
    match run() {
        Ok(code) => std::process::exit(code),
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            std::process::exit(2);
        }
    }
}
