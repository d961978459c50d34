//! `equilibria`: the equilibrium catalogue with linearization spectra.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::Serialize;
use twocenter::model::{equilibria, EquilibriumKind, ModelParams};

use crate::manifest::ManifestBuilder;
use crate::values::parse_sqrt_value;

#[derive(Debug, Args)]
pub struct EquilibriaArgs {
    /// Rest length a (accepts sqrt(k) and sqrt(k)/m tokens).
    #[arg(long, value_parser = parse_sqrt_value)]
    pub a: f64,
    /// Also write equilibria.json and a manifest here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct EigJson {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct EquilibriumJson {
    x: f64,
    y: f64,
    px: f64,
    py: f64,
    kind: &'static str,
    eigenvalues: Vec<EigJson>,
}

#[derive(Serialize)]
struct EquilibriaParams {
    a: f64,
    saddle_energy: f64,
}

fn kind_name(kind: EquilibriumKind) -> &'static str {
    match kind {
        EquilibriumKind::LinearCenter => "linear-center",
        EquilibriumKind::SaddleCenter => "saddle-center",
        EquilibriumKind::Degenerate => "degenerate",
    }
}

pub fn run(args: &EquilibriaArgs) -> Result<i32> {
    let params = ModelParams::new(args.a)?;
    let eqs = equilibria(&params)?;

    println!(
        "equilibria for a = {} (E_s = {}):",
        args.a,
        params.saddle_energy()
    );
    println!(
        "{:>12} {:>12}  {:<14} eigenvalues",
        "x", "y", "kind"
    );
    for eq in &eqs {
        let eigs = eq
            .eigenvalues
            .iter()
            .map(|l| format!("{:+.6}{:+.6}i", l.re, l.im))
            .collect::<Vec<_>>()
            .join(", ");
        println!(
            "{:>12.6} {:>12.6}  {:<14} {}",
            eq.state.x,
            eq.state.y,
            kind_name(eq.kind),
            eigs
        );
    }

    if let Some(dir) = &args.out_dir {
        let mut manifest = ManifestBuilder::new(dir, "equilibria")?;
        let doc: Vec<EquilibriumJson> = eqs
            .iter()
            .map(|eq| EquilibriumJson {
                x: eq.state.x,
                y: eq.state.y,
                px: eq.state.px,
                py: eq.state.py,
                kind: kind_name(eq.kind),
                eigenvalues: eq
                    .eigenvalues
                    .iter()
                    .map(|l| EigJson { re: l.re, im: l.im })
                    .collect(),
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        manifest.write_file("equilibria.json", text.as_bytes())?;
        manifest.finish(EquilibriaParams {
            a: args.a,
            saddle_energy: params.saddle_energy(),
        })?;
    }
    Ok(0)
}
