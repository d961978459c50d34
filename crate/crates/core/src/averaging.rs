//! Closed-form first-order averaging around the elliptic equilibrium
//! (0, √(a²−1), 0, 0): the reduced slow system, its period-averaged
//! right-hand side, the zeros of the averaged functions, their Jacobian
//! determinant, and synthesis of periodic-orbit initial conditions.
//!
//! Scaling conventions: the fast angle θ has period T = √2·a·π; the orbit
//! lives on the energy level H = ε²h; the averaged functions f = (f1, f2)
//! act on the slow polar pair (ρ, s). A simple zero (ρ̃, s̃) with nonzero
//! Jacobian seeds a periodic orbit whose initial condition is O(ε²)-accurate.
//!
//! The parameter values a = √(N²+1) are resonant: the averaged functions
//! vanish identically and the method carries no information. The single
//! exception is a = √5 (N = 2), where the generic expressions degenerate to
//! 0/0 but the average itself stays finite; that case is served by a
//! dedicated branch.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::model::{apply_symmetry, ModelParams, PhaseState, Symmetry};

/// Width of the resonance detection window around √(N²+1).
pub const RESONANCE_TOL: f64 = 1e-12;

/// Policy cap on the bifurcation scale ε; beyond it the expansion is used
/// outside its comfort zone and callers should warn.
pub const EPSILON_POLICY_CAP: f64 = 0.1;

/// Validity floor for the Jacobian determinant at a zero.
const DET_FLOOR: f64 = 1e-12;

/// Newton self-check displacement allowed before a zero is flagged.
const REFINE_SHIFT_TOL: f64 = 1e-9;

/// Period of the fast angle: T = √2·a·π.
pub fn averaging_period(p: &ModelParams) -> f64 {
    SQRT_2 * p.a() * PI
}

/// Period of the averaged functions in the slow phase s: √2·π·a/g.
pub fn s_period(p: &ModelParams) -> Option<f64> {
    p.g().map(|g| SQRT_2 * PI * p.a() / g)
}

/// Which closed form applies at this parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragedBranch {
    Generic,
    Sqrt5,
}

/// Checks the applicability of first-order averaging at `a`: requires a > 1,
/// routes a = √5 to its dedicated branch, and rejects the remaining
/// resonances a = √(N²+1).
pub fn applicability(p: &ModelParams) -> Result<AveragedBranch> {
    let a = p.a();
    let g = p.g().ok_or_else(|| {
        Error::Domain(format!("averaging requires a > 1 (got a = {a})"))
    })?;
    if (a - 5.0f64.sqrt()).abs() <= RESONANCE_TOL {
        return Ok(AveragedBranch::Sqrt5);
    }
    let n_max = g.ceil() as u32 + 1;
    for n in 1..=n_max {
        let resonant = ((n as f64) * (n as f64) + 1.0).sqrt();
        if (a - resonant).abs() <= RESONANCE_TOL {
            return Err(Error::ResonantParameter {
                a,
                n,
                tol: RESONANCE_TOL,
            });
        }
    }
    Ok(AveragedBranch::Generic)
}

/// A bifurcation query: parameter, reduced energy h (H = ε²h) and scale ε.
#[derive(Debug, Clone, Copy)]
pub struct AveragingQuery {
    pub params: ModelParams,
    pub h: f64,
    pub epsilon: f64,
}

impl AveragingQuery {
    pub fn new(params: ModelParams, h: f64, epsilon: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!("reduced energy h must be > 0, got {h}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be > 0, got {epsilon}")));
        }
        applicability(&params)?;
        Ok(Self { params, h, epsilon })
    }

    /// True when ε exceeds the asymptotic-regime policy cap.
    pub fn epsilon_exceeds_policy(&self) -> bool {
        self.epsilon > EPSILON_POLICY_CAP
    }
}

/// A zero of the averaged functions with its synthesis data.
#[derive(Debug, Clone, Copy)]
pub struct AveragingResult {
    /// Branch index (n of the s̃ formula, or the lattice index k on the √5
    /// branch).
    pub n: i64,
    pub s_tilde: f64,
    pub rho_tilde: f64,
    pub r_tilde: f64,
    pub det_a: f64,
    pub valid: bool,
}

fn require_rho(rho: f64) -> Result<()> {
    if rho > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("rho must be > 0, got {rho}")))
    }
}

/// Order-ε coefficients (dρ/dθ, ds/dθ)/ε of the reduced slow system on the
/// energy level H = ε²h. Valid for any a > 1 (the √5 and resonant values
/// included; degeneracy only appears after averaging).
pub fn reduced_rhs(p: &ModelParams, h: f64, theta: f64, rho: f64, s: f64) -> Result<(f64, f64)> {
    require_rho(rho)?;
    let a = p.a();
    let g = p
        .g()
        .ok_or_else(|| Error::Domain(format!("reduced system requires a > 1 (got a = {a})")))?;
    let a2 = a * a;
    let rho2 = rho * rho;
    let phi = SQRT_2 * g * (theta + s) / a;
    let psi = SQRT_2 * theta / a;

    let d_rho = (phi.sin() / (SQRT_2 * a2 * a))
        * ((a2 - 3.0) * (a2 * (h - rho2) + rho2) * psi.cos() * psi.cos()
            + 3.0 * rho2 * phi.cos() * phi.cos());

    let d_s = (phi.cos() / (4.0 * a2 * g * rho))
        * ((a2 - 3.0) * (a2 * (h - 3.0 * rho2) + 3.0 * rho2) * (2.0 * psi).cos()
            + (a2 - 3.0) * a2 * h
            - 3.0 * (a2 * a2 - 4.0 * a2 + 2.0) * rho2
            + 3.0 * rho2 * (2.0 * phi).cos());

    Ok((d_rho, d_s))
}

fn averaged_f_generic(a: f64, g: f64, h: f64, rho: f64, s: f64) -> (f64, f64) {
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let rho2 = rho * rho;
    let chi = g * (PI * a + SQRT_2 * s) / a;
    let cos_sum = (2.0 * SQRT_2 * g * s / a).cos()
        + (2.0 * g * (PI * a + SQRT_2 * s) / a).cos()
        + (2.0 * g * (2.0 * PI * a + SQRT_2 * s) / a).cos();
    let cos_2pig = (2.0 * PI * g).cos();

    let f1 = (PI * g).sin() * chi.sin() / (2.0 * SQRT_2 * PI * a2 * a * (a2 - 5.0) * g)
        * (2.0 * a2 * (a2 - 3.0) * (a2 - 3.0) * h
            + (a2 - 5.0) * rho2 * (cos_sum + cos_2pig)
            - 2.0 * (a6 - 7.0 * a4 + 14.0 * a2 - 4.0) * rho2);

    let f2 = (PI * g).sin() * chi.cos() / (4.0 * PI * a2 * (a2 - 5.0) * (a2 - 1.0) * rho)
        * (2.0 * a2 * (a2 - 3.0) * (a2 - 3.0) * h
            + (a2 - 5.0) * rho2 * (cos_sum - cos_2pig)
            + 2.0 * (-3.0 * a6 + 21.0 * a4 - 43.0 * a2 + 17.0) * rho2);

    (f1, f2)
}

fn averaged_f_sqrt5(h: f64, rho: f64, s: f64) -> (f64, f64) {
    let arg = 2.0 * (2.0f64 / 5.0).sqrt() * s;
    let f1 = (5.0 * h - 4.0 * rho * rho) * arg.sin() / (10.0 * 10.0f64.sqrt());
    let f2 = (5.0 * h - 12.0 * rho * rho) * arg.cos() / (40.0 * rho);
    (f1, f2)
}

/// The first-order averaged functions f = (f1, f2), i.e. the θ-average of
/// [`reduced_rhs`] over one period T = √2·a·π in closed form. Dispatches to
/// the dedicated branch at a = √5; errors at the other resonances, where the
/// average vanishes identically.
pub fn averaged_f(p: &ModelParams, h: f64, rho: f64, s: f64) -> Result<(f64, f64)> {
    require_rho(rho)?;
    match applicability(p)? {
        AveragedBranch::Sqrt5 => Ok(averaged_f_sqrt5(h, rho, s)),
        AveragedBranch::Generic => {
            let g = p.g().expect("a > 1 guaranteed by applicability");
            Ok(averaged_f_generic(p.a(), g, h, rho, s))
        }
    }
}

/// Denominator of the ρ̃ closed form.
fn rho_denominator(a: f64, g: f64) -> f64 {
    let a2 = a * a;
    let a4 = a2 * a2;
    6.0 * a4 * a2 - 42.0 * a4 + 85.0 * a2 - (a2 - 5.0) * (2.0 * PI * g).cos() - 29.0
}

/// Closed-form Jacobian determinant of f at its zeros; depends only on
/// (a, h).
fn det_a_closed(a: f64, g: f64, h: f64) -> f64 {
    let a2 = a * a;
    let a4 = a2 * a2;
    let sin_pig = (PI * g).sin();
    (a2 - 3.0) * (a2 - 3.0) * h * sin_pig * sin_pig
        / (PI * PI * a4 * (a2 - 5.0) * (a2 - 5.0) * (a2 - 1.0))
        * (2.0 * a4 * a2 - 14.0 * a4 + 29.0 * a2 + (a2 - 5.0) * (2.0 * PI * g).cos() - 13.0)
}

/// Reduces s into the admissible window [−2π, 2π) by whole s-periods;
/// returns the smallest admissible representative.
fn reduce_s(s_raw: f64, period: f64) -> Option<f64> {
    let k = ((-2.0 * PI - s_raw) / period).ceil();
    let s = s_raw + k * period;
    (-2.0 * PI..2.0 * PI).contains(&s).then_some(s)
}

/// Central-difference Jacobian determinant of a 2D map.
fn fd_jacobian_det<F>(f: F, rho: f64, s: f64) -> f64
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let d_rho = 1e-6 * rho.abs().max(1.0);
    let d_s = 1e-6 * s.abs().max(1.0);
    let (f1_pr, f2_pr) = f(rho + d_rho, s);
    let (f1_mr, f2_mr) = f(rho - d_rho, s);
    let (f1_ps, f2_ps) = f(rho, s + d_s);
    let (f1_ms, f2_ms) = f(rho, s - d_s);
    let j11 = (f1_pr - f1_mr) / (2.0 * d_rho);
    let j21 = (f2_pr - f2_mr) / (2.0 * d_rho);
    let j12 = (f1_ps - f1_ms) / (2.0 * d_s);
    let j22 = (f2_ps - f2_ms) / (2.0 * d_s);
    j11 * j22 - j12 * j21
}

/// Two Newton steps on f from (ρ, s); returns the total displacement, or
/// None when the local Jacobian is too degenerate to invert.
fn newton_self_check<F>(f: &F, rho: f64, s: f64) -> Option<f64>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let (mut r, mut z) = (rho, s);
    for _ in 0..2 {
        let d_r = 1e-6 * r.abs().max(1.0);
        let d_z = 1e-6 * z.abs().max(1.0);
        let (f1, f2) = f(r, z);
        let (f1_pr, f2_pr) = f(r + d_r, z);
        let (f1_mr, f2_mr) = f(r - d_r, z);
        let (f1_pz, f2_pz) = f(r, z + d_z);
        let (f1_mz, f2_mz) = f(r, z - d_z);
        let j11 = (f1_pr - f1_mr) / (2.0 * d_r);
        let j21 = (f2_pr - f2_mr) / (2.0 * d_r);
        let j12 = (f1_pz - f1_mz) / (2.0 * d_z);
        let j22 = (f2_pz - f2_mz) / (2.0 * d_z);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-14 {
            return None;
        }
        r -= (j22 * f1 - j12 * f2) / det;
        z -= (-j21 * f1 + j11 * f2) / det;
    }
    Some(((r - rho) * (r - rho) + (z - s) * (z - s)).sqrt())
}

/// Closed-form candidate zero of the averaged functions on branch `n`:
/// s̃ = πa(n−g)/(√2 g) reduced into [−2π, 2π), ρ̃ from the h-linear radical,
/// r̃ from the energy restriction, and the closed-form determinant. Only the
/// generic branch; a = √5 is served by [`solve_zeros_sqrt5`].
pub fn candidate_zero(p: &ModelParams, h: f64, n: i64) -> Result<AveragingResult> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("reduced energy h must be > 0, got {h}")));
    }
    match applicability(p)? {
        AveragedBranch::Sqrt5 => {
            return Err(Error::Domain(
                "a = sqrt(5) has a dedicated branch; use solve_zeros_sqrt5".into(),
            ))
        }
        AveragedBranch::Generic => {}
    }
    let a = p.a();
    let g = p.g().expect("a > 1 guaranteed by applicability");

    let s_raw = PI * a * (n as f64 - g) / (SQRT_2 * g);
    let period = s_period(p).expect("a > 1");
    let s_tilde = reduce_s(s_raw, period).ok_or_else(|| Error::InvalidBranch {
        n,
        reason: format!("no representative of s = {s_raw:.6} lies in [-2pi, 2pi)"),
    })?;

    let denom = rho_denominator(a, g);
    if denom <= 0.0 {
        return Err(Error::InvalidBranch {
            n,
            reason: format!("rho denominator is non-positive ({denom:.6})"),
        });
    }
    let rho_tilde = a * (2.0 * (a * a - 3.0) * (a * a - 3.0) * h / denom).sqrt();
    let r_sq = a * a * (h - rho_tilde * rho_tilde) + rho_tilde * rho_tilde;
    if r_sq <= 0.0 {
        return Err(Error::InvalidBranch {
            n,
            reason: format!("r_tilde^2 = {r_sq:.6} is not positive"),
        });
    }
    let r_tilde = r_sq.sqrt();
    let det_a = det_a_closed(a, g, h);

    let f = |r: f64, z: f64| averaged_f_generic(a, g, h, r, z);
    let shift = newton_self_check(&f, rho_tilde, s_tilde);
    let valid = det_a.abs() > DET_FLOOR
        && rho_tilde > 0.0
        && r_tilde > 0.0
        && shift.is_some_and(|d| d < REFINE_SHIFT_TOL);

    Ok(AveragingResult {
        n,
        s_tilde,
        rho_tilde,
        r_tilde,
        det_a,
        valid,
    })
}

/// Zeros of the a = √5 averaged functions (the sin branch): ρ̃ = √(5h/12)
/// with the phase lattice s = kπ/(2√(2/5)) intersected with [−2π, 2π).
/// The determinant at each zero comes from central differences.
pub fn solve_zeros_sqrt5(h: f64) -> Result<Vec<AveragingResult>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("reduced energy h must be > 0, got {h}")));
    }
    let a2 = 5.0;
    let rho_tilde = (5.0 * h / 12.0).sqrt();
    let r_tilde = (a2 * (h - rho_tilde * rho_tilde) + rho_tilde * rho_tilde).sqrt();
    let c = 2.0 * (2.0f64 / 5.0).sqrt();
    let spacing = PI / c;
    let k_min = (-2.0 * PI / spacing).ceil() as i64;
    let k_max = ((2.0 * PI / spacing).floor() as i64).min(((2.0 * PI) / spacing) as i64);

    let mut out = Vec::new();
    for k in k_min..=k_max {
        let s_tilde = k as f64 * spacing;
        if !(-2.0 * PI..2.0 * PI).contains(&s_tilde) {
            continue;
        }
        let det_a = fd_jacobian_det(|r, z| averaged_f_sqrt5(h, r, z), rho_tilde, s_tilde);
        let shift = newton_self_check(&|r, z| averaged_f_sqrt5(h, r, z), rho_tilde, s_tilde);
        out.push(AveragingResult {
            n: k,
            s_tilde,
            rho_tilde,
            r_tilde,
            det_a,
            valid: det_a.abs() > DET_FLOOR
                && r_tilde > 0.0
                && shift.is_some_and(|d| d < REFINE_SHIFT_TOL),
        });
    }
    Ok(out)
}

/// Jacobian determinant of the averaged functions at a zero. On the generic
/// branch this is the closed form (a function of a and h alone); at a = √5
/// it falls back to central differences of the special branch at the zero.
pub fn det_jacobian(p: &ModelParams, h: f64, res: &AveragingResult) -> Result<f64> {
    match applicability(p)? {
        AveragedBranch::Generic => {
            let g = p.g().expect("a > 1 guaranteed by applicability");
            Ok(det_a_closed(p.a(), g, h))
        }
        AveragedBranch::Sqrt5 => Ok(fd_jacobian_det(
            |r, z| averaged_f_sqrt5(h, r, z),
            res.rho_tilde,
            res.s_tilde,
        )),
    }
}

/// Initial condition of the periodic orbit seeded by a valid averaged zero:
/// (ε·r̃, √(a²−1) + ε·ρ̃·cos(√2·g·s̃/a), 0, −ε·(√2·g/a)·ρ̃·sin(√2·g·s̃/a)),
/// accurate to O(ε²).
pub fn initial_conditions(q: &AveragingQuery, res: &AveragingResult) -> Result<PhaseState> {
    if !res.valid {
        return Err(Error::Domain(
            "cannot synthesize initial conditions from an invalid averaged zero".into(),
        ));
    }
    let a = q.params.a();
    let g = q.params.g().expect("query construction enforces a > 1");
    let eps = q.epsilon;
    let phase = SQRT_2 * g * res.s_tilde / a;
    Ok(PhaseState::new(
        eps * res.r_tilde,
        g + eps * res.rho_tilde * phase.cos(),
        0.0,
        -eps * (SQRT_2 * g / a) * res.rho_tilde * phase.sin(),
    ))
}

/// A member of the discrete-symmetry family of an orbit seed.
#[derive(Debug, Clone, Copy)]
pub struct FamilyMember {
    pub state: PhaseState,
    /// None for the seed itself, otherwise the symmetry that produced it.
    pub symmetry: Option<Symmetry>,
    /// Which equilibrium (0, ±√(a²−1)) the member neighbors.
    pub near_positive_y: bool,
}

/// The up-to-four distinct initial conditions obtained from `ic` under the
/// discrete symmetries, deduplicated componentwise at 1e−12. Identifying
/// which images trace the *same orbit* is the caller's concern; this only
/// deduplicates identical states.
pub fn symmetry_family(ic: &PhaseState) -> Vec<FamilyMember> {
    let mut out: Vec<FamilyMember> = vec![FamilyMember {
        state: *ic,
        symmetry: None,
        near_positive_y: ic.y > 0.0,
    }];
    for sym in [Symmetry::S1, Symmetry::S2, Symmetry::S1S2] {
        let image = apply_symmetry(sym, *ic);
        let duplicate = out.iter().any(|m| {
            let a = m.state.to_array();
            let b = image.to_array();
            a.iter().zip(&b).all(|(u, v)| (u - v).abs() <= 1e-12)
        });
        if !duplicate {
            out.push(FamilyMember {
                state: image,
                symmetry: Some(sym),
                near_positive_y: image.y > 0.0,
            });
        }
    }
    out
}

/// The two linear frequencies at (0, ±√(a²−1)) and, when ω_x/ω_y = 1/g is
/// (numerically) rational with denominator ≤ 64, the reduced pair (l, j).
#[derive(Debug, Clone, Copy)]
pub struct FrequencyRatio {
    pub omega_x: f64,
    pub omega_y: f64,
    /// (l, j) with ω_x/ω_y = l/j in lowest terms.
    pub rational: Option<(u64, u64)>,
}

/// Continued-fraction rational detection of ω_x/ω_y = 1/g.
pub fn frequency_ratio(p: &ModelParams) -> Result<FrequencyRatio> {
    let g = p.g().ok_or_else(|| {
        Error::Domain(format!("frequency ratio requires a > 1 (got a = {})", p.a()))
    })?;
    Ok(FrequencyRatio {
        omega_x: p.omega_x().expect("a > 1 implies a > 0"),
        omega_y: p.omega_y().expect("a > 1"),
        rational: rational_approx(1.0 / g, 64, 1e-9),
    })
}

fn rational_approx(v: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    if !(v.is_finite() && v > 0.0) {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (1u64, 0u64, 0u64, 1u64);
    let mut frac = v;
    for _ in 0..64 {
        let a = frac.floor();
        if a > 1e12 {
            break;
        }
        let a_int = a as u64;
        let p2 = a_int.checked_mul(p0)?.checked_add(p1)?;
        let q2 = a_int.checked_mul(q0)?.checked_add(q1)?;
        if q2 > max_den {
            break;
        }
        (p1, q1, p0, q0) = (p0, q0, p2, q2);
        if (v - p0 as f64 / q0 as f64).abs() <= tol {
            return Some((p0, q0));
        }
        let rem = frac - a;
        if rem.abs() < 1e-15 {
            break;
        }
        frac = 1.0 / rem;
    }
    ((v - p0 as f64 / q0 as f64).abs() <= tol && q0 >= 1).then_some((p0, q0))
}

/// Parameter value realizing a commensurate ratio ω_x/ω_y = l/j:
/// a = √((j/l)² + 1).
pub fn a_for_ratio(l: u64, j: u64) -> Result<ModelParams> {
    if l == 0 || j == 0 {
        return Err(Error::Domain("oscillation counts l, j must be positive".into()));
    }
    let ratio = j as f64 / l as f64;
    ModelParams::new((ratio * ratio + 1.0).sqrt())
}
