//! `potential-grid`: a rectangular sampling of U(x, y) for contour plots.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::Serialize;
use twocenter::model::ModelParams;

use crate::manifest::ManifestBuilder;
use crate::render::grid_csv;
use crate::values::parse_sqrt_value;

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Rest length a (accepts sqrt(k) and sqrt(k)/m tokens).
    #[arg(long, value_parser = parse_sqrt_value)]
    pub a: f64,
    /// Half width of the square grid.
    #[arg(long, default_value_t = 3.0)]
    pub range: f64,
    /// Grid spacing.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct GridParams {
    a: f64,
    range: f64,
    step: f64,
    points_per_side: usize,
}

pub fn run(args: &GridArgs) -> Result<i32> {
    if !(args.range > 0.0 && args.step > 0.0) {
        anyhow::bail!(twocenter::Error::Domain(
            "range and step must be positive".into()
        ));
    }
    let params = ModelParams::new(args.a)?;
    let n = (2.0 * args.range / args.step).floor() as usize + 1;
    let mut rows = Vec::with_capacity(n * n);
    for iy in 0..n {
        let y = -args.range + iy as f64 * args.step;
        for ix in 0..n {
            let x = -args.range + ix as f64 * args.step;
            rows.push((x, y, params.potential(x, y)));
        }
    }
    let mut manifest = ManifestBuilder::new(&args.out_dir, "potential-grid")?;
    manifest.write_file("potential.csv", grid_csv(&rows).as_bytes())?;
    manifest.finish(GridParams {
        a: args.a,
        range: args.range,
        step: args.step,
        points_per_side: n,
    })?;
    println!(
        "potential-grid: {}x{} samples (U(0,0) = {}) -> {}",
        n,
        n,
        params.potential(0.0, 0.0),
        args.out_dir.display()
    );
    Ok(0)
}
