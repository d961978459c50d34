//! Command-line laboratory for the planar two-fixed-center problem with
//! harmonic-like interactions.
//!
//! Exit codes: 0 ok, 1 partial failure, 2 usage, 3 domain error,
//! 4 convergence failure.

mod commands;
mod manifest;
mod render;
mod values;

use clap::{Parser, Subcommand};
use twocenter::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "twocenter",
    version,
    about = "Poincaré sections, Lyapunov exponents, averaged periodic orbits and \
             Floquet analysis for the planar two-fixed-center problem"
)]
struct Cli {
    /// Worker thread count (the TWOCENTER_THREADS environment variable
    /// overrides this flag).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Oriented Poincaré section on the plane x = 0 with px > 0.
    Section(commands::section::SectionArgs),
    /// Periodic orbits from first-order averaging, refinement, multipliers.
    Orbits(commands::orbits::OrbitsArgs),
    /// Maximal Lyapunov exponents for a batch of initial conditions.
    Lyapunov(commands::lyapunov::LyapunovArgs),
    /// Equilibrium points and their linearization spectra.
    Equilibria(commands::equilibria::EquilibriaArgs),
    /// Potential samples on a square grid.
    PotentialGrid(commands::potential_grid::GridArgs),
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CoreError>() {
        Some(
            CoreError::EmptyRegion { .. }
            | CoreError::ResonantParameter { .. }
            | CoreError::Domain(_)
            | CoreError::DegenerateParameter
            | CoreError::InvalidBranch { .. }
            | CoreError::RejectionStall { .. },
        ) => 3,
        Some(
            CoreError::NoConvergence { .. }
            | CoreError::SingularShooting { .. }
            | CoreError::StepSizeUnderflow { .. },
        ) => 4,
        _ => 1,
    }
}

fn main() {
    let cli = Cli::parse();

    let threads = std::env::var("TWOCENTER_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(cli.threads);
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }

    let outcome = match &cli.command {
        Command::Section(args) => commands::section::run(args),
        Command::Orbits(args) => commands::orbits::run(args),
        Command::Lyapunov(args) => commands::lyapunov::run(args),
        Command::Equilibria(args) => commands::equilibria::run(args),
        Command::PotentialGrid(args) => commands::potential_grid::run(args),
    };

    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code_for(&err));
        }
    }
}
