//! `section`: oriented Poincaré sections on x = 0 with px > 0.

use std::path::PathBuf;

use anyhow::Result;
use clap::{ArgGroup, Args};
use serde::Serialize;
use twocenter::integrator::CrossingDirection;
use twocenter::model::ModelParams;
use twocenter::sections::run_section;

use crate::commands::ConfigArgs;
use crate::manifest::ManifestBuilder;
use crate::render::{section_csv, section_svg};
use crate::values::parse_sqrt_value;

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("energy_spec").required(true).args(["energy", "energy_in_es"])))]
pub struct SectionArgs {
    /// Rest length a (accepts sqrt(k) and sqrt(k)/m tokens).
    #[arg(long, value_parser = parse_sqrt_value)]
    pub a: f64,
    /// Absolute energy level H = E.
    #[arg(long)]
    pub energy: Option<f64>,
    /// Energy as a multiple of the saddle energy E_s = (a-1)^2.
    #[arg(long)]
    pub energy_in_es: Option<f64>,
    /// Number of random initial conditions.
    #[arg(long, default_value_t = 120)]
    pub n_ic: usize,
    /// Simulation time per initial condition.
    #[arg(long, default_value_t = 6000.0)]
    pub t_max: f64,
    /// Seed of the per-IC random streams.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also emit a deterministic SVG scatter plot.
    #[arg(long)]
    pub svg: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Serialize)]
struct SectionParams {
    a: f64,
    energy: f64,
    energy_in_es_units: f64,
    saddle_energy: f64,
    seed: u64,
    n_ic: usize,
    t_max: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    direction: i8,
}

pub fn run(args: &SectionArgs) -> Result<i32> {
    let params = ModelParams::new(args.a)?;
    let es = params.saddle_energy();
    let energy = match (args.energy, args.energy_in_es) {
        (Some(e), _) => e,
        (None, Some(f)) => f * es,
        (None, None) => unreachable!("clap group enforces one"),
    };
    let cfg = args.cfg.to_config();
    let run = run_section(
        &params,
        energy,
        args.n_ic,
        args.seed,
        args.t_max,
        &cfg,
        CrossingDirection::Increasing,
    )?;

    let mut manifest = ManifestBuilder::new(&args.out_dir, "section")?;
    manifest.write_file("section.csv", section_csv(&run).as_bytes())?;
    if args.svg {
        let title = format!("section x=0, px>0 | a={} E={} ({}/{} ICs)",
            args.a, energy, args.n_ic - run.failures.len(), args.n_ic);
        manifest.write_file("section.svg", section_svg(&run, &title).as_bytes())?;
    }
    manifest.finish(SectionParams {
        a: args.a,
        energy,
        energy_in_es_units: energy / es,
        saddle_energy: es,
        seed: args.seed,
        n_ic: args.n_ic,
        t_max: args.t_max,
        rel_tol: args.cfg.rel_tol,
        abs_tol: args.cfg.abs_tol,
        max_step: args.cfg.max_step,
        direction: 1,
    })?;

    let worst_drift = run
        .energy_drifts
        .iter()
        .filter(|d| d.is_finite())
        .fold(0.0f64, |acc, d| acc.max(*d));
    println!(
        "section: {} points from {} ICs (E = {energy}, {} failures, worst drift {worst_drift:.2e}) -> {}",
        run.points.len(),
        args.n_ic,
        run.failures.len(),
        args.out_dir.display()
    );
    for f in &run.failures {
        eprintln!("  ic {}: {}", f.ic_index, f.error);
    }
    if run.failures.len() * 10 > args.n_ic {
        eprintln!(
            "error: {} of {} trajectories failed to integrate",
            run.failures.len(),
            args.n_ic
        );
        return Ok(1);
    }
    Ok(0)
}
