//! Periodic-orbit refinement and verification: Newton shooting on the
//! return-map residual, monodromy matrices, Floquet multipliers, and the
//! Poincaré multiplier test for Liouville–Arnold non-integrability.
//!
//! An autonomous Hamiltonian periodic orbit always carries two unit
//! multipliers (time translation and energy conservation). A multiplier
//! pair genuinely away from 1 is therefore a witness against the existence
//! of an independent second integral; all-unit multipliers decide nothing.

use nalgebra::{Complex, Matrix4, SMatrix, SVector, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrator::{
    flow_map, integrate_events, integrate_variational, CrossingDirection, EventSpec,
    IntegratorConfig,
};
use crate::model::{ModelParams, PhaseState, Symmetry};

/// Orbits refined below this closure norm satisfy the monodromy
/// precondition.
pub const CLOSURE_PRECONDITION: f64 = 1e-8;

/// Shooting convergence target on |flow(ic, T) − ic|.
pub const CLOSURE_TARGET: f64 = 1e-10;

/// A nontrivial multiplier counts as a non-unit witness above this; chosen
/// an order of magnitude above the multiplier accuracy so noise can never
/// fake a witness.
pub const TAU_UNIT: f64 = 1e-3;

const TRIVIAL_TOL: f64 = 1e-4;
const DET_RESIDUAL_TOL: f64 = 1e-6;
const MAX_NEWTON_ITERS: usize = 25;

/// Where an orbit candidate came from.
#[derive(Debug, Clone, Copy)]
pub struct OrbitSource {
    /// Averaging branch index.
    pub branch: i64,
    /// Symmetry image tag (None for the seed orbit itself).
    pub symmetry: Option<Symmetry>,
}

/// An approximate periodic orbit to be refined.
#[derive(Debug, Clone, Copy)]
pub struct OrbitCandidate {
    pub ic: PhaseState,
    /// For a commensurate ratio (l, j) the linearized closure time is
    /// l·√2·π·a.
    pub period_guess: f64,
    pub source: OrbitSource,
    pub h: f64,
    pub epsilon: f64,
}

/// A converged periodic orbit.
#[derive(Debug, Clone, Copy)]
pub struct RefinedOrbit {
    pub ic: PhaseState,
    pub period: f64,
    /// |flow(ic, T) − ic| at the solution.
    pub closure: f64,
}

/// Monodromy data for one periodic orbit.
#[derive(Debug, Clone)]
pub struct MonodromyReport {
    pub matrix: Matrix4<f64>,
    /// Eigenvalues of the monodromy matrix, sorted by |μ − 1| ascending
    /// (the two trivial multipliers come first).
    pub multipliers: [Complex64; 4],
    /// |det M − 1|.
    pub det_residual: f64,
    /// max |μ − 1| over the two multipliers designated trivial.
    pub trivial_residual: f64,
    /// |flow(ic, T) − ic| of the orbit the matrix belongs to.
    pub closure_residual: f64,
    pub verdict: MultiplierVerdict,
}

impl MonodromyReport {
    /// Largest |μ − 1| over the nontrivial pair.
    pub fn nontrivial_deviation(&self) -> f64 {
        self.multipliers[2..]
            .iter()
            .map(|m| (m - Complex64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }
}

/// Per-orbit multiplier classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierVerdict {
    /// All four multipliers unit within tolerance.
    AllUnit,
    /// The nontrivial pair deviates from 1 beyond [`TAU_UNIT`].
    NonUnit,
    /// Preconditions not met (closure, trivial pair or determinant off).
    Inconclusive,
}

/// Outcome of the multiplier test over a family of orbits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeVerdict {
    /// Some orbit has a multiplier pair away from 1: the system cannot have
    /// a second C¹ first integral independent along that orbit.
    WitnessFound {
        report_index: usize,
        deviation: f64,
    },
    /// Every usable orbit has unit multipliers; consistent with
    /// integrability, which this test can never affirm.
    Inconclusive,
}

/// Probe result with the evidence count.
#[derive(Debug, Clone, Copy)]
pub struct ProbeOutcome {
    pub verdict: ProbeVerdict,
    pub reports_used: usize,
}

fn grad_hamiltonian(p: &ModelParams, s: &PhaseState) -> Result<[f64; 4]> {
    let f = p.vector_field(s)?;
    Ok([-f[2], -f[3], f[0], f[1]])
}

/// Newton shooting on the residual flow(ic, T) − ic with two gauge
/// conditions: the energy is pinned to the candidate's level and the px
/// component of the initial state is frozen (section anchor), leaving
/// unknowns (x, y, py, T). The overdetermined 5×4 system is solved by
/// least squares; steps are halved when the residual fails to decrease.
pub fn refine_orbit(
    p: &ModelParams,
    cand: &OrbitCandidate,
    cfg: &IntegratorConfig,
) -> Result<RefinedOrbit> {
    if !(cand.period_guess > 0.0 && cand.period_guess.is_finite()) {
        return Err(Error::Domain(format!(
            "period guess must be positive, got {}",
            cand.period_guess
        )));
    }
    let px_anchor = cand.ic.px;
    let e0 = p.hamiltonian(&cand.ic);
    let state_of = |u: &SVector<f64, 4>| PhaseState::new(u[0], u[1], px_anchor, u[2]);

    let residual5 = |u: &SVector<f64, 4>| -> Result<(SVector<f64, 5>, f64)> {
        let s0 = state_of(u);
        let end = flow_map(p, &s0, u[3], cfg)?;
        let d = [end.x - s0.x, end.y - s0.y, end.px - s0.px, end.py - s0.py];
        let closure = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut r = SVector::<f64, 5>::zeros();
        r[0] = d[0];
        r[1] = d[1];
        r[2] = d[2];
        r[3] = d[3];
        r[4] = p.hamiltonian(&s0) - e0;
        Ok((r, closure))
    };

    let mut u = SVector::<f64, 4>::new(cand.ic.x, cand.ic.y, cand.ic.py, cand.period_guess);
    let mut best: Option<(SVector<f64, 4>, f64)> = None;

    for iter in 0..=MAX_NEWTON_ITERS {
        let s0 = state_of(&u);
        let (end, m) = integrate_variational(p, &s0, u[3], cfg)?;
        let d = [end.x - s0.x, end.y - s0.y, end.px - s0.px, end.py - s0.py];
        let closure = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(_, c)| closure < *c) {
            best = Some((u, closure));
        }
        if closure < CLOSURE_TARGET {
            return finish_refinement(p, state_of(&u), u[3], closure, cfg);
        }
        if iter == MAX_NEWTON_ITERS {
            break;
        }

        // Shooting Jacobian: columns are the (x, y, py) directions of
        // (M − I) plus the flow direction at the endpoint for T.
        let f_end = p.vector_field(&end)?;
        let grad = grad_hamiltonian(p, &s0)?;
        let mut jac = SMatrix::<f64, 5, 4>::zeros();
        let ident = Matrix4::<f64>::identity();
        for (col_out, col_state) in [(0usize, 0usize), (1, 1), (2, 3)] {
            for row in 0..4 {
                jac[(row, col_out)] = m[(row, col_state)] - ident[(row, col_state)];
            }
            jac[(4, col_out)] = grad[col_state];
        }
        for row in 0..4 {
            jac[(row, 3)] = f_end[row];
        }

        let svd = jac.svd(true, true);
        let (sv_max, sv_min) = svd
            .singular_values
            .iter()
            .fold((f64::MIN, f64::MAX), |(hi, lo), &s| (hi.max(s), lo.min(s)));
        if sv_min < 1e-12 * sv_max {
            return Err(Error::SingularShooting {
                ratio: sv_min / sv_max,
            });
        }

        let mut r = SVector::<f64, 5>::zeros();
        r[0] = d[0];
        r[1] = d[1];
        r[2] = d[2];
        r[3] = d[3];
        r[4] = p.hamiltonian(&s0) - e0;
        let full_step = svd.solve(&(-r), 1e-14).expect("svd solve");

        // Damped update.
        let norm0 = r.norm();
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let trial = u + full_step * lambda;
            if trial[3] > 0.0 {
                if let Ok((r_new, _)) = residual5(&trial) {
                    if r_new.norm() < norm0 {
                        u = trial;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // No productive direction left; report the best iterate.
            break;
        }
    }

    let (bu, bc) = best.expect("at least one iterate evaluated");
    Err(Error::NoConvergence {
        iters: MAX_NEWTON_ITERS,
        closure: bc,
        best_ic: state_of(&bu),
        best_period: bu[3],
    })
}

/// Sub-harmonic guard: if the orbit already closes at T/2 the minimal period
/// was overestimated; halve (at most a few times) and keep the closure.
fn finish_refinement(
    p: &ModelParams,
    ic: PhaseState,
    period: f64,
    closure: f64,
    cfg: &IntegratorConfig,
) -> Result<RefinedOrbit> {
    let mut t = period;
    let mut c = closure;
    for _ in 0..3 {
        let half = t / 2.0;
        let end = flow_map(p, &ic, half, cfg)?;
        let d = end.distance(&ic);
        if d < CLOSURE_PRECONDITION {
            t = half;
            c = d;
        } else {
            break;
        }
    }
    Ok(RefinedOrbit {
        ic,
        period: t,
        closure: c,
    })
}

/// Monodromy matrix of the periodic orbit (ic, T) with its multipliers,
/// residuals and verdict. The two eigenvalues nearest 1 are designated the
/// trivial pair; the verdict weighs only the remaining two.
pub fn monodromy(
    p: &ModelParams,
    ic: &PhaseState,
    period: f64,
    cfg: &IntegratorConfig,
) -> Result<MonodromyReport> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Domain(format!("period must be positive, got {period}")));
    }
    let (end, m) = integrate_variational(p, ic, period, cfg)?;
    let closure_residual = end.distance(ic);
    let det_residual = (m.determinant() - 1.0).abs();

    let eigs: Vector4<Complex<f64>> = m.complex_eigenvalues();
    let mut multipliers: Vec<Complex64> =
        eigs.iter().map(|e| Complex64::new(e.re, e.im)).collect();
    multipliers.sort_by(|a, b| {
        let da = (a - Complex64::new(1.0, 0.0)).norm();
        let db = (b - Complex64::new(1.0, 0.0)).norm();
        da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
    });
    let multipliers: [Complex64; 4] = [
        multipliers[0],
        multipliers[1],
        multipliers[2],
        multipliers[3],
    ];
    let trivial_residual = multipliers[..2]
        .iter()
        .map(|m| (m - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let nontrivial = multipliers[2..]
        .iter()
        .map(|m| (m - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);

    let verdict = if closure_residual >= CLOSURE_PRECONDITION
        || trivial_residual > TRIVIAL_TOL
        || det_residual > DET_RESIDUAL_TOL
    {
        MultiplierVerdict::Inconclusive
    } else if nontrivial > TAU_UNIT {
        MultiplierVerdict::NonUnit
    } else {
        MultiplierVerdict::AllUnit
    };

    Ok(MonodromyReport {
        matrix: m,
        multipliers,
        det_residual,
        trivial_residual,
        closure_residual,
        verdict,
    })
}

/// Poincaré multiplier test over a family of monodromy reports: one orbit
/// with a non-unit multiplier pair settles non-integrability; unanimous unit
/// multipliers remain inconclusive. Reports failing the closure
/// precondition carry no weight.
pub fn integrability_probe(reports: &[MonodromyReport]) -> Result<ProbeOutcome> {
    let usable: Vec<(usize, &MonodromyReport)> = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.closure_residual < CLOSURE_PRECONDITION)
        .collect();
    if usable.is_empty() {
        return Err(Error::InsufficientEvidence {
            required: CLOSURE_PRECONDITION,
        });
    }
    let mut witness: Option<(usize, f64)> = None;
    for (idx, report) in &usable {
        if report.verdict == MultiplierVerdict::Inconclusive {
            continue;
        }
        let dev = report.nontrivial_deviation();
        if dev > TAU_UNIT && witness.is_none_or(|(_, best)| dev > best) {
            witness = Some((*idx, dev));
        }
    }
    Ok(ProbeOutcome {
        verdict: match witness {
            Some((report_index, deviation)) => ProbeVerdict::WitnessFound {
                report_index,
                deviation,
            },
            None => ProbeVerdict::Inconclusive,
        },
        reports_used: usable.len(),
    })
}

/// Counts transversal zero crossings of px and of py along the orbit over
/// one period (a half-open window interior to the integration span, so the
/// on-surface initial point never miscounts). A closed orbit with l
/// oscillations in x and j in y yields exactly (2l, 2j).
pub fn oscillation_counts(
    p: &ModelParams,
    ic: &PhaseState,
    period: f64,
    cfg: &IntegratorConfig,
) -> Result<(usize, usize)> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Domain(format!("period must be positive, got {period}")));
    }
    let t_off = 0.2347 * period;
    let span = (0.0, t_off + period + 1e-9);
    let count = |surface: fn(&PhaseState) -> f64| -> Result<usize> {
        let ev = EventSpec::new(surface, CrossingDirection::Any);
        let hits = integrate_events(p, ic, span, cfg, &ev)?;
        Ok(hits
            .iter()
            .filter(|(t, _)| *t > t_off && *t <= t_off + period)
            .count())
    };
    Ok((count(|s| s.px)?, count(|s| s.py)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::{
        a_for_ratio, candidate_zero, initial_conditions, solve_zeros_sqrt5, AveragingQuery,
    };
    use std::f64::consts::{PI, SQRT_2};

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    fn sqrt5_candidate(h: f64, eps: f64) -> (ModelParams, OrbitCandidate) {
        let p = a_for_ratio(1, 2).unwrap();
        let q = AveragingQuery::new(p, h, eps).unwrap();
        let zeros = solve_zeros_sqrt5(h).unwrap();
        let z = zeros
            .iter()
            .find(|z| (z.s_tilde + 4.96729 * h.sqrt() / h.sqrt()).abs() < 1e-4)
            .copied()
            .unwrap_or(zeros[0]);
        let ic = initial_conditions(&q, &z).unwrap();
        let period = SQRT_2 * PI * p.a();
        (
            p,
            OrbitCandidate {
                ic,
                period_guess: period,
                source: OrbitSource {
                    branch: z.n,
                    symmetry: None,
                },
                h,
                epsilon: eps,
            },
        )
    }

    #[test]
    fn exact_linear_orbit_needs_no_correction() {
        // At a = 0 every state is periodic with period sqrt(2)π; the shooting
        // residual is already at closure tolerance.
        let p = ModelParams::new(0.0).unwrap();
        let ic = PhaseState::new(1.0, 0.0, 0.0, 1.0);
        let cand = OrbitCandidate {
            ic,
            period_guess: SQRT_2 * PI,
            source: OrbitSource {
                branch: 0,
                symmetry: None,
            },
            h: 1.0,
            epsilon: 1.0,
        };
        let orbit = refine_orbit(&p, &cand, &cfg()).unwrap();
        assert!(orbit.closure < CLOSURE_TARGET);
        assert!(orbit.ic.distance(&ic) < 1e-9, "correction {}", orbit.ic.distance(&ic));
    }

    #[test]
    fn sqrt5_candidate_refines_with_small_correction() {
        let (p, cand) = sqrt5_candidate(1.0, 1e-2);
        let orbit = refine_orbit(&p, &cand, &cfg()).unwrap();
        assert!(orbit.closure < CLOSURE_TARGET, "closure {}", orbit.closure);
        let correction = orbit.ic.distance(&cand.ic);
        assert!(correction < 1e-3, "correction {correction} not O(eps^2)");
        assert!((orbit.period - cand.period_guess).abs() < 0.2 * cand.period_guess);
    }

    #[test]
    fn monodromy_of_a_refined_orbit_has_unit_structure() {
        let (p, cand) = sqrt5_candidate(1.0, 1e-2);
        let orbit = refine_orbit(&p, &cand, &cfg()).unwrap();
        let report = monodromy(&p, &orbit.ic, orbit.period, &cfg()).unwrap();
        assert!(report.det_residual <= 1e-6);
        assert!(report.trivial_residual <= 1e-4);
        assert!(report.closure_residual < CLOSURE_PRECONDITION);
        // reciprocal pairing of the sorted multipliers
        let m = &report.multipliers;
        let paired = (m[0] * m[1] - Complex64::new(1.0, 0.0)).norm() < 1e-4
            && (m[2] * m[3] - Complex64::new(1.0, 0.0)).norm() < 1e-4;
        assert!(paired, "multipliers not reciprocal-paired: {m:?}");
    }

    #[test]
    fn oscillation_counts_match_the_frequency_ratio() {
        let (p, cand) = sqrt5_candidate(1.0, 1e-2);
        let orbit = refine_orbit(&p, &cand, &cfg()).unwrap();
        // close over the full commensurate period l·sqrt(2)πa with l = 1
        let (cx, cy) = oscillation_counts(&p, &orbit.ic, orbit.period, &cfg()).unwrap();
        assert_eq!((cx, cy), (2, 4), "expected (2l, 2j) = (2, 4)");
    }

    #[test]
    fn probe_threshold_logic() {
        let unit = Complex64::new(1.0, 0.0);
        let mk = |mults: [Complex64; 4], closure: f64| MonodromyReport {
            matrix: Matrix4::identity(),
            multipliers: mults,
            det_residual: 0.0,
            trivial_residual: (mults[1] - unit).norm(),
            closure_residual: closure,
            verdict: if (mults[3] - unit).norm() > TAU_UNIT {
                MultiplierVerdict::NonUnit
            } else {
                MultiplierVerdict::AllUnit
            },
        };
        let witness = mk(
            [unit, unit, Complex64::new(1.0 / 2.3, 0.0), Complex64::new(2.3, 0.0)],
            1e-11,
        );
        let quiet = mk([unit; 4], 1e-11);
        let outcome = integrability_probe(std::slice::from_ref(&quiet)).unwrap();
        assert_eq!(outcome.verdict, ProbeVerdict::Inconclusive);
        let outcome = integrability_probe(&[quiet, witness]).unwrap();
        assert!(matches!(
            outcome.verdict,
            ProbeVerdict::WitnessFound {
                report_index: 1,
                ..
            }
        ));
        // closure precondition filters evidence entirely
        let sloppy = mk([unit; 4], 1e-3);
        assert!(matches!(
            integrability_probe(&[sloppy]),
            Err(Error::InsufficientEvidence { .. })
        ));
    }

    #[test]
    fn refinement_reports_nonconvergence_with_best_iterate() {
        // A deliberately hopeless guess: period an order of magnitude off.
        let p = ModelParams::new(13.0f64.sqrt() / 3.0).unwrap();
        let q = AveragingQuery::new(p, 1.0, 1e-2).unwrap();
        let z = candidate_zero(&p, 1.0, 0).unwrap();
        let ic = initial_conditions(&q, &z).unwrap();
        let cand = OrbitCandidate {
            ic,
            period_guess: 2.0,
            source: OrbitSource {
                branch: 0,
                symmetry: None,
            },
            h: 1.0,
            epsilon: 1e-2,
        };
        match refine_orbit(&p, &cand, &cfg()) {
            Err(Error::NoConvergence { closure, .. }) => assert!(closure.is_finite()),
            Ok(orbit) => {
                // If it does close, it must have found a genuine sub-orbit.
                assert!(orbit.closure < CLOSURE_TARGET);
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
