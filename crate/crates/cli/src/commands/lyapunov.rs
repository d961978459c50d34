//! `lyapunov`: maximal Lyapunov exponent batches over sampled initial
//! conditions.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Result;
use clap::{ArgGroup, Args};
use rayon::prelude::*;
use serde::Serialize;
use twocenter::chaos::mle;
use twocenter::model::ModelParams;
use twocenter::sections::sample_ics;

use crate::commands::ConfigArgs;
use crate::manifest::ManifestBuilder;
use crate::render::lyapunov_csv;
use crate::values::parse_sqrt_value;

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("energy_spec").required(true).args(["energy", "energy_in_es"])))]
pub struct LyapunovArgs {
    /// Rest length a (accepts sqrt(k) and sqrt(k)/m tokens).
    #[arg(long, value_parser = parse_sqrt_value)]
    pub a: f64,
    /// Absolute energy level H = E.
    #[arg(long)]
    pub energy: Option<f64>,
    /// Energy as a multiple of the saddle energy E_s.
    #[arg(long)]
    pub energy_in_es: Option<f64>,
    /// Number of sampled initial conditions.
    #[arg(long, default_value_t = 16)]
    pub n_ic: usize,
    /// Estimation horizon.
    #[arg(long, default_value_t = 6000.0)]
    pub t_max: f64,
    /// Tangent-vector renormalization interval.
    #[arg(long, default_value_t = 1.0)]
    pub renorm_interval: f64,
    /// Seed for initial conditions and tangent directions.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Discard the estimate accumulated before this time in the summary.
    #[arg(long, default_value_t = 0.0)]
    pub burn_in: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Serialize)]
struct LyapunovParams {
    a: f64,
    energy: f64,
    energy_in_es_units: f64,
    saddle_energy: f64,
    n_ic: usize,
    t_max: f64,
    renorm_interval: f64,
    seed: u64,
    burn_in: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
}

pub fn run(args: &LyapunovArgs) -> Result<i32> {
    let params = ModelParams::new(args.a)?;
    let es = params.saddle_energy();
    let energy = match (args.energy, args.energy_in_es) {
        (Some(e), _) => e,
        (None, Some(f)) => f * es,
        (None, None) => unreachable!("clap group enforces one"),
    };
    let cfg = args.cfg.to_config();
    let ics = sample_ics(&params, energy, args.n_ic, args.seed)?;

    let results: Vec<_> = ics
        .par_iter()
        .enumerate()
        .map(|(i, ic)| {
            let tangent_seed = args
                .seed
                .wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            (
                i,
                mle(&params, ic, args.t_max, args.renorm_interval, &cfg, tangent_seed),
            )
        })
        .collect();

    let mut manifest = ManifestBuilder::new(&args.out_dir, "lyapunov")?;
    let mut summary = String::from("ic_index,final_lambda\n");
    let mut failures = 0usize;
    for (i, outcome) in &results {
        match outcome {
            Ok(series) => {
                let name = format!("lyapunov_{i:03}.csv");
                manifest.write_file(&name, lyapunov_csv(&series.checkpoints).as_bytes())?;
                let final_lambda = series.final_with_burn_in(args.burn_in);
                let _ = writeln!(summary, "{},{}", i, final_lambda);
            }
            Err(e) => {
                eprintln!("  ic {i}: {e}");
                let _ = writeln!(summary, "{},nan", i);
                failures += 1;
            }
        }
    }
    manifest.write_file("summary.csv", summary.as_bytes())?;
    manifest.finish(LyapunovParams {
        a: args.a,
        energy,
        energy_in_es_units: energy / es,
        saddle_energy: es,
        n_ic: args.n_ic,
        t_max: args.t_max,
        renorm_interval: args.renorm_interval,
        seed: args.seed,
        burn_in: args.burn_in,
        rel_tol: args.cfg.rel_tol,
        abs_tol: args.cfg.abs_tol,
        max_step: args.cfg.max_step,
    })?;

    println!(
        "lyapunov: {} series at a = {}, E = {energy} ({failures} failures) -> {}",
        args.n_ic - failures,
        args.a,
        args.out_dir.display()
    );
    if failures * 10 > args.n_ic {
        eprintln!("error: {failures} of {} estimations failed", args.n_ic);
        return Ok(1);
    }
    Ok(0)
}
