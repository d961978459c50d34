//! `orbits`: periodic-orbit synthesis from the averaged functions, with
//! optional shooting refinement and Floquet-multiplier analysis.

use std::f64::consts::{PI, SQRT_2};
use std::path::PathBuf;

use anyhow::Result;
use clap::{ArgGroup, Args};
use num_complex::Complex64;
use serde::Serialize;
use twocenter::averaging::{
    a_for_ratio, applicability, candidate_zero, frequency_ratio, initial_conditions,
    solve_zeros_sqrt5, symmetry_family, AveragedBranch, AveragingQuery, AveragingResult,
};
use twocenter::floquet::{
    integrability_probe, monodromy, oscillation_counts, refine_orbit, MonodromyReport,
    MultiplierVerdict, OrbitCandidate, OrbitSource, ProbeVerdict, RefinedOrbit,
};
use twocenter::integrator::integrate_at;
use twocenter::model::{ModelParams, PhaseState, Symmetry};
use twocenter::Error;

use crate::commands::ConfigArgs;
use crate::manifest::ManifestBuilder;
use crate::render::trajectory_csv;
use crate::values::{parse_ratio, parse_sqrt_value};

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("param").required(true).args(["a", "ratio"])))]
pub struct OrbitsArgs {
    /// Rest length a (accepts sqrt(k) and sqrt(k)/m tokens).
    #[arg(long, value_parser = parse_sqrt_value)]
    pub a: Option<f64>,
    /// Commensurate frequency ratio l:j, setting a = sqrt((j/l)^2 + 1).
    #[arg(long, value_parser = parse_ratio)]
    pub ratio: Option<(u64, u64)>,
    /// Reduced energy level (the orbit lives at H ≈ epsilon^2 h).
    #[arg(long, default_value_t = 1.0)]
    pub h: f64,
    /// Bifurcation scale.
    #[arg(long, default_value_t = 1e-2)]
    pub epsilon: f64,
    /// Averaged-zero branch indices (generic parameter values).
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub branches: Vec<i64>,
    /// Newton-refine each seed into a closed orbit.
    #[arg(long)]
    pub refine: bool,
    /// Compute monodromy matrices and the integrability verdict (implies --refine).
    #[arg(long)]
    pub multipliers: bool,
    /// Trajectory sample length in closure periods.
    #[arg(long, default_value_t = 20.0)]
    pub simulate_periods: f64,
    /// Trajectory samples per closure period.
    #[arg(long, default_value_t = 256)]
    pub samples_per_period: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Serialize)]
struct StateJson {
    x: f64,
    y: f64,
    px: f64,
    py: f64,
}

impl From<PhaseState> for StateJson {
    fn from(s: PhaseState) -> Self {
        Self {
            x: s.x,
            y: s.y,
            px: s.px,
            py: s.py,
        }
    }
}

#[derive(Serialize)]
struct FamilyJson {
    state: StateJson,
    symmetry: Option<&'static str>,
    near_positive_y: bool,
}

#[derive(Serialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct MonodromyJson {
    multipliers: Vec<ComplexJson>,
    det_residual: f64,
    trivial_residual: f64,
    closure_residual: f64,
    verdict: &'static str,
}

#[derive(Serialize)]
struct RefinedJson {
    ic: StateJson,
    period: f64,
    closure: f64,
    correction_from_seed: f64,
    oscillation_counts: Option<(usize, usize)>,
}

#[derive(Serialize)]
struct BranchJson {
    n: i64,
    s_tilde: f64,
    rho_tilde: f64,
    r_tilde: f64,
    det_a: f64,
    valid: bool,
    ic: Option<StateJson>,
    family: Vec<FamilyJson>,
    trajectory_csv: Option<String>,
    refined: Option<RefinedJson>,
    refine_error: Option<String>,
    monodromy: Option<MonodromyJson>,
}

#[derive(Serialize)]
struct RatioJson {
    l: u64,
    j: u64,
}

#[derive(Serialize)]
struct ProbeJson {
    verdict: String,
    reports_used: usize,
    deviation: Option<f64>,
}

#[derive(Serialize)]
struct OrbitsParams {
    a: f64,
    h: f64,
    epsilon: f64,
    epsilon_exceeds_policy: bool,
    branches: Vec<i64>,
    refine: bool,
    multipliers: bool,
    simulate_periods: f64,
    samples_per_period: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
}

#[derive(Serialize)]
struct OrbitsJson {
    a: f64,
    h: f64,
    epsilon: f64,
    saddle_energy: f64,
    omega_x: f64,
    omega_y: f64,
    ratio: Option<RatioJson>,
    branches: Vec<BranchJson>,
    probe: Option<ProbeJson>,
}

fn symmetry_name(sym: Option<Symmetry>) -> Option<&'static str> {
    sym.map(|s| match s {
        Symmetry::S1 => "S1",
        Symmetry::S2 => "S2",
        Symmetry::S1S2 => "S1S2",
    })
}

fn verdict_name(v: MultiplierVerdict) -> &'static str {
    match v {
        MultiplierVerdict::AllUnit => "multipliers-all-unit",
        MultiplierVerdict::NonUnit => "multipliers-non-unit",
        MultiplierVerdict::Inconclusive => "inconclusive",
    }
}

pub fn run(args: &OrbitsArgs) -> Result<i32> {
    let params = match (args.a, args.ratio) {
        (Some(a), _) => ModelParams::new(a)?,
        (None, Some((l, j))) => a_for_ratio(l, j)?,
        (None, None) => unreachable!("clap group enforces one"),
    };
    let query = AveragingQuery::new(params, args.h, args.epsilon)?;
    if query.epsilon_exceeds_policy() {
        eprintln!(
            "warning: epsilon = {} exceeds the policy cap {}; the first-order \
             expansion is used outside its comfort zone",
            args.epsilon,
            twocenter::averaging::EPSILON_POLICY_CAP
        );
    }
    let fr = frequency_ratio(&params)?;
    let branch_kind = applicability(&params)?;
    let cfg = args.cfg.to_config();
    let do_refine = args.refine || args.multipliers;

    let zeros: Vec<std::result::Result<AveragingResult, Error>> = match branch_kind {
        AveragedBranch::Sqrt5 => {
            println!("a = sqrt(5): using the dedicated averaged branch; zeros enumerated on the phase lattice");
            solve_zeros_sqrt5(args.h)?.into_iter().map(Ok).collect()
        }
        AveragedBranch::Generic => args
            .branches
            .iter()
            .map(|&n| candidate_zero(&params, args.h, n))
            .collect(),
    };

    let closure_period = fr
        .rational
        .map(|(l, _)| l as f64 * SQRT_2 * PI * params.a());
    if do_refine && closure_period.is_none() {
        eprintln!(
            "warning: omega_x/omega_y = {} is not close to a small rational; the motion \
             is quasi-periodic and refinement is skipped",
            fr.omega_x / fr.omega_y
        );
    }

    let mut manifest = ManifestBuilder::new(&args.out_dir, "orbits")?;
    let mut branches_json = Vec::new();
    let mut reports: Vec<MonodromyReport> = Vec::new();
    let mut refine_attempts = 0usize;
    let mut refine_successes = 0usize;

    for zero in &zeros {
        let zero = match zero {
            Ok(z) => z,
            Err(e) => {
                eprintln!("warning: {e}");
                continue;
            }
        };
        let ic = if zero.valid {
            Some(initial_conditions(&query, zero)?)
        } else {
            None
        };
        let family = ic
            .map(|s| {
                symmetry_family(&s)
                    .into_iter()
                    .map(|m| FamilyJson {
                        state: m.state.into(),
                        symmetry: symmetry_name(m.symmetry),
                        near_positive_y: m.near_positive_y,
                    })
                    .collect()
            })
            .unwrap_or_default();

        let mut refined: Option<RefinedOrbit> = None;
        let mut refine_error = None;
        if let (true, Some(seed), Some(t_guess)) = (do_refine, ic, closure_period) {
            refine_attempts += 1;
            let cand = OrbitCandidate {
                ic: seed,
                period_guess: t_guess,
                source: OrbitSource {
                    branch: zero.n,
                    symmetry: None,
                },
                h: args.h,
                epsilon: args.epsilon,
            };
            match refine_orbit(&params, &cand, &cfg) {
                Ok(orbit) => {
                    refine_successes += 1;
                    refined = Some(orbit);
                }
                Err(e) => {
                    eprintln!("warning: branch {}: {e}", zero.n);
                    refine_error = Some(e.to_string());
                }
            }
        }

        let mono = match (&refined, args.multipliers) {
            (Some(orbit), true) => {
                let report = monodromy(&params, &orbit.ic, orbit.period, &cfg)?;
                let json = MonodromyJson {
                    multipliers: report
                        .multipliers
                        .iter()
                        .map(|m: &Complex64| ComplexJson { re: m.re, im: m.im })
                        .collect(),
                    det_residual: report.det_residual,
                    trivial_residual: report.trivial_residual,
                    closure_residual: report.closure_residual,
                    verdict: verdict_name(report.verdict),
                };
                reports.push(report);
                Some(json)
            }
            _ => None,
        };

        // Trajectory samples for plotting: the refined orbit when available,
        // otherwise the averaged seed over the closure period (or the x
        // period when the motion is quasi-periodic).
        let trajectory_csv_name = match (ic, &refined) {
            (Some(seed), _) => {
                let (start, period) = match &refined {
                    Some(orbit) => (orbit.ic, orbit.period),
                    None => (
                        seed,
                        closure_period.unwrap_or(SQRT_2 * PI * params.a()),
                    ),
                };
                let total = args.simulate_periods * period;
                let n = (args.samples_per_period as f64 * args.simulate_periods) as usize;
                let times: Vec<f64> =
                    (0..=n).map(|i| total * i as f64 / n as f64).collect();
                let traj = integrate_at(&params, &start, (0.0, total), &cfg, &times)?;
                let name = format!("orbit_branch_{}.csv", zero.n);
                manifest.write_file(&name, trajectory_csv(&traj.times, &traj.states).as_bytes())?;
                Some(name)
            }
            _ => None,
        };

        let refined_json = refined.map(|orbit| RefinedJson {
            ic: orbit.ic.into(),
            period: orbit.period,
            closure: orbit.closure,
            correction_from_seed: ic.map_or(f64::NAN, |s| orbit.ic.distance(&s)),
            oscillation_counts: oscillation_counts(&params, &orbit.ic, orbit.period, &cfg).ok(),
        });

        branches_json.push(BranchJson {
            n: zero.n,
            s_tilde: zero.s_tilde,
            rho_tilde: zero.rho_tilde,
            r_tilde: zero.r_tilde,
            det_a: zero.det_a,
            valid: zero.valid,
            ic: ic.map(Into::into),
            family,
            trajectory_csv: trajectory_csv_name,
            refined: refined_json,
            refine_error,
            monodromy: mono,
        });
    }

    let probe = if args.multipliers && !reports.is_empty() {
        match integrability_probe(&reports) {
            Ok(outcome) => Some(match outcome.verdict {
                ProbeVerdict::WitnessFound { deviation, .. } => ProbeJson {
                    verdict: "non-integrability witness: a periodic orbit carries \
                              multipliers away from 1"
                        .into(),
                    reports_used: outcome.reports_used,
                    deviation: Some(deviation),
                },
                ProbeVerdict::Inconclusive => ProbeJson {
                    verdict: "all multipliers unit within tolerance; consistent with \
                              integrability (inconclusive)"
                        .into(),
                    reports_used: outcome.reports_used,
                    deviation: None,
                },
            }),
            Err(e) => {
                eprintln!("warning: {e}");
                None
            }
        }
    } else {
        None
    };

    let doc = OrbitsJson {
        a: params.a(),
        h: args.h,
        epsilon: args.epsilon,
        saddle_energy: params.saddle_energy(),
        omega_x: fr.omega_x,
        omega_y: fr.omega_y,
        ratio: fr.rational.map(|(l, j)| RatioJson { l, j }),
        branches: branches_json,
        probe,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    manifest.write_file("orbits.json", text.as_bytes())?;
    manifest.finish(OrbitsParams {
        a: params.a(),
        h: args.h,
        epsilon: args.epsilon,
        epsilon_exceeds_policy: query.epsilon_exceeds_policy(),
        branches: args.branches.clone(),
        refine: args.refine,
        multipliers: args.multipliers,
        simulate_periods: args.simulate_periods,
        samples_per_period: args.samples_per_period,
        rel_tol: args.cfg.rel_tol,
        abs_tol: args.cfg.abs_tol,
        max_step: args.cfg.max_step,
    })?;

    println!(
        "orbits: {} branch(es) at a = {}, h = {}, epsilon = {} -> {}",
        doc.branches.len(),
        params.a(),
        args.h,
        args.epsilon,
        args.out_dir.display()
    );
    for b in &doc.branches {
        match (&b.ic, &b.refined) {
            (Some(ic), Some(r)) => println!(
                "  n = {}: ic = ({}, {}, {}, {}), refined period {} (closure {:.2e})",
                b.n, ic.x, ic.y, ic.px, ic.py, r.period, r.closure
            ),
            (Some(ic), None) => println!(
                "  n = {}: ic = ({}, {}, {}, {})",
                b.n, ic.x, ic.y, ic.px, ic.py
            ),
            _ => println!("  n = {}: no admissible zero", b.n),
        }
    }

    if do_refine && refine_attempts > 0 && refine_successes == 0 {
        eprintln!("error: refinement failed for every branch");
        return Ok(4);
    }
    Ok(0)
}
