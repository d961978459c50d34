//! Oriented Poincaré sections on the plane x = 0 in coordinates (y, py),
//! with energy-constrained random sampling of initial conditions.
//!
//! Initial conditions are drawn by per-index seeded rejection sampling so a
//! batch is reproducible regardless of how it is parallelized; trajectories
//! are integrated independently and merged in index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrator::{events_with_drift, x_plane, CrossingDirection, IntegratorConfig};
use crate::model::{ModelParams, PhaseState};

/// Attempt budget per accepted sample; exceeding it means the acceptance
/// rate is below ~1e−6 and the sampler reports a stall instead of spinning.
const REJECTION_ATTEMPT_CAP: u64 = 2_000_000;

/// One section crossing.
#[derive(Debug, Clone, Copy)]
pub struct SectionPoint {
    pub y: f64,
    pub py: f64,
    /// Crossing time.
    pub t: f64,
    /// Index of the initial condition the crossing belongs to.
    pub ic_index: usize,
}

/// A trajectory of the batch that could not be integrated.
#[derive(Debug, Clone)]
pub struct IcFailure {
    pub ic_index: usize,
    pub error: String,
}

/// A complete section run with its provenance.
#[derive(Debug, Clone)]
pub struct SectionRun {
    pub params: ModelParams,
    pub energy: f64,
    pub seed: u64,
    pub n_ic: usize,
    pub t_max: f64,
    /// Crossings ordered by (ic_index, t).
    pub points: Vec<SectionPoint>,
    pub ics: Vec<PhaseState>,
    /// Worst energy drift per trajectory (NaN where the trajectory failed).
    pub energy_drifts: Vec<f64>,
    pub failures: Vec<IcFailure>,
}

/// Minimum of the potential restricted to the section line x = 0.
pub fn section_min_potential(p: &ModelParams) -> f64 {
    if p.a() >= 1.0 {
        0.0
    } else {
        (1.0 - p.a()) * (1.0 - p.a())
    }
}

/// Outer turning point on the section: the positive root of U(0, y) = E.
pub fn section_y_max(p: &ModelParams, energy: f64) -> f64 {
    let reach = p.a() + energy.max(0.0).sqrt();
    (reach * reach - 1.0).max(0.0).sqrt()
}

/// Inner forbidden-band half width: below the saddle energy the section
/// splits into two lobes |y| > y_gap that merge as E reaches E_s.
pub fn section_y_gap(p: &ModelParams, energy: f64) -> Option<f64> {
    let inner = p.a() - energy.max(0.0).sqrt();
    if p.a() > 1.0 && inner >= 1.0 {
        Some((inner * inner - 1.0).sqrt())
    } else {
        None
    }
}

/// Draws `n` states on the section x = 0 at energy `E`, uniformly by
/// rejection over the accessible region U(0, y) + py²/2 ≤ E, with
/// px = +sqrt(2(E − U) − py²) so every state satisfies H = E exactly.
///
/// Stream `i` of the generator seeds sample `i`, which makes the list
/// independent of evaluation order.
pub fn sample_ics(p: &ModelParams, energy: f64, n: usize, seed: u64) -> Result<Vec<PhaseState>> {
    let min_u = section_min_potential(p);
    if !(energy > min_u) {
        return Err(Error::EmptyRegion {
            energy,
            min_potential: min_u,
        });
    }
    let y_max = section_y_max(p, energy);
    let py_max = (2.0 * energy).sqrt();
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut attempts: u64 = 0;
            loop {
                attempts += 1;
                if attempts > REJECTION_ATTEMPT_CAP {
                    return Err(Error::RejectionStall {
                        attempts,
                        rate: 1e-6,
                    });
                }
                let y = rng.gen_range(-y_max..=y_max);
                let py = rng.gen_range(-py_max..=py_max);
                let u = p.potential(0.0, y);
                let px_sq = 2.0 * (energy - u) - py * py;
                if px_sq >= 0.0 {
                    return Ok(PhaseState::new(0.0, y, px_sq.sqrt(), py));
                }
            }
        })
        .collect()
}

/// Collects all crossings of x = 0 with the requested orientation for each
/// initial condition, up to `t_max`. Per-trajectory integration errors are
/// recorded, not fatal. Results are merged in `ic_index` order.
pub fn poincare_section(
    p: &ModelParams,
    energy: f64,
    ics: &[PhaseState],
    t_max: f64,
    cfg: &IntegratorConfig,
    direction: CrossingDirection,
) -> SectionRun {
    let outcomes: Vec<std::result::Result<(Vec<SectionPoint>, f64), String>> = ics
        .par_iter()
        .enumerate()
        .map(|(idx, ic)| {
            let ev = x_plane(direction);
            match events_with_drift(p, ic, (0.0, t_max), cfg, &ev) {
                Ok((crossings, drift)) => Ok((
                    crossings
                        .into_iter()
                        .map(|(t, s)| SectionPoint {
                            y: s.y,
                            py: s.py,
                            t,
                            ic_index: idx,
                        })
                        .collect(),
                    drift,
                )),
                Err(e) => Err(e.to_string()),
            }
        })
        .collect();

    let mut points = Vec::new();
    let mut drifts = Vec::with_capacity(ics.len());
    let mut failures = Vec::new();
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((pts, drift)) => {
                points.extend(pts);
                drifts.push(drift);
            }
            Err(error) => {
                drifts.push(f64::NAN);
                failures.push(IcFailure {
                    ic_index: idx,
                    error,
                });
            }
        }
    }

    SectionRun {
        params: *p,
        energy,
        seed: 0,
        n_ic: ics.len(),
        t_max,
        points,
        ics: ics.to_vec(),
        energy_drifts: drifts,
        failures,
    }
}

/// Samples initial conditions and runs the section in one call, recording the
/// seed in the run.
pub fn run_section(
    p: &ModelParams,
    energy: f64,
    n_ic: usize,
    seed: u64,
    t_max: f64,
    cfg: &IntegratorConfig,
    direction: CrossingDirection,
) -> Result<SectionRun> {
    let ics = sample_ics(p, energy, n_ic, seed)?;
    let mut run = poincare_section(p, energy, &ics, t_max, cfg, direction);
    run.seed = seed;
    Ok(run)
}
