//! System definition: Hamiltonian, potential, vector field, analytic
//! Jacobian, equilibria and discrete symmetries.
//!
//! The model describes a particle in the plane coupled to two fixed centers
//! at (±1, 0) by harmonic-like interactions with common rest length `a`,
//! the single dimensionless parameter:
//!
//! ```text
//! H = (px² + py²)/2 + U(x, y)
//! U = [(r1 − a)² + (r2 − a)²]/2,   r1,2 = sqrt((x ± 1)² + y²)
//! ```

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Distance below which a fixed center counts as hit; the force divides by
/// r1, r2 and is undefined at zero.
pub const SINGULARITY_RADIUS: f64 = 1e-12;

/// Relative threshold under which an eigenvalue real part counts as zero.
const PURE_IMAG_TOL: f64 = 1e-10;

/// Model parameters: the dimensionless rest length `a` and derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    a: f64,
}

impl ModelParams {
    /// Requires finite `a >= 0`.
    pub fn new(a: f64) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::Domain(format!(
                "rest length a must be finite and >= 0, got {a}"
            )));
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// g = sqrt(a² − 1), defined for a > 1 (distance of the two potential
    /// minima (0, ±g) from the x axis).
    pub fn g(&self) -> Option<f64> {
        (self.a > 1.0).then(|| (self.a * self.a - 1.0).sqrt())
    }

    /// Saddle energy E_s = U(0, 0) = (a − 1)², the reference energy at which
    /// the two accessible lobes of the section merge.
    pub fn saddle_energy(&self) -> f64 {
        (self.a - 1.0) * (self.a - 1.0)
    }

    /// Linear frequency sqrt(2)/a in the x direction at (0, ±g); defined for a > 0.
    pub fn omega_x(&self) -> Option<f64> {
        (self.a > 0.0).then(|| std::f64::consts::SQRT_2 / self.a)
    }

    /// Linear frequency sqrt(2)·g/a in the y direction at (0, ±g); defined for a > 1.
    pub fn omega_y(&self) -> Option<f64> {
        self.g().map(|g| std::f64::consts::SQRT_2 * g / self.a)
    }

    /// Potential U(x, y) ≥ 0; defined everywhere.
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        let y2 = y * y;
        let d1 = ((x + 1.0) * (x + 1.0) + y2).sqrt() - self.a;
        let d2 = ((x - 1.0) * (x - 1.0) + y2).sqrt() - self.a;
        0.5 * (d1 * d1 + d2 * d2)
    }

    /// Total energy H(s) = kinetic + potential; conserved along the exact flow.
    pub fn hamiltonian(&self, s: &PhaseState) -> f64 {
        0.5 * (s.px * s.px + s.py * s.py) + self.potential(s.x, s.y)
    }

    /// Center distances, erroring when either is inside the singularity guard.
    fn checked_radii(&self, s: &PhaseState) -> Result<(f64, f64)> {
        let y2 = s.y * s.y;
        let r1 = ((s.x + 1.0) * (s.x + 1.0) + y2).sqrt();
        let r2 = ((s.x - 1.0) * (s.x - 1.0) + y2).sqrt();
        if r1 <= SINGULARITY_RADIUS {
            return Err(Error::SingularCenter {
                which: 1,
                r: r1,
                delta: SINGULARITY_RADIUS,
            });
        }
        if r2 <= SINGULARITY_RADIUS {
            return Err(Error::SingularCenter {
                which: 2,
                r: r2,
                delta: SINGULARITY_RADIUS,
            });
        }
        Ok((r1, r2))
    }

    /// Hamilton's equations (ẋ, ẏ, ṗx, ṗy). At a = 0 the center terms
    /// vanish and the field is the plain isotropic oscillator, smooth
    /// everywhere; otherwise the force divides by the center distances and
    /// the singularity guard applies.
    pub fn vector_field(&self, s: &PhaseState) -> Result<[f64; 4]> {
        if self.a == 0.0 {
            return Ok([s.px, s.py, -2.0 * s.x, -2.0 * s.y]);
        }
        let (r1, r2) = self.checked_radii(s)?;
        Ok([
            s.px,
            s.py,
            -2.0 * s.x + self.a * ((s.x + 1.0) / r1 + (s.x - 1.0) / r2),
            -2.0 * s.y + self.a * s.y * (1.0 / r1 + 1.0 / r2),
        ])
    }

    /// Analytic Jacobian of the vector field. Has the Hamiltonian block
    /// structure [[0, I], [−Hess U, 0]]; trace is identically zero.
    pub fn jacobian_vf(&self, s: &PhaseState) -> Result<Matrix4<f64>> {
        let (u_xx, u_xy, u_yy) = self.hessian_potential(s)?;
        Ok(Matrix4::new(
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            -u_xx, -u_xy, 0.0, 0.0, //
            -u_xy, -u_yy, 0.0, 0.0,
        ))
    }

    /// Hessian of the potential (U_xx, U_xy, U_yy).
    pub(crate) fn hessian_potential(&self, s: &PhaseState) -> Result<(f64, f64, f64)> {
        if self.a == 0.0 {
            return Ok((2.0, 0.0, 2.0));
        }
        let (r1, r2) = self.checked_radii(s)?;
        let (c1, c2) = (r1 * r1 * r1, r2 * r2 * r2);
        let y2 = s.y * s.y;
        let u_xx = 2.0 - self.a * (y2 / c1 + y2 / c2);
        let u_xy = self.a * s.y * ((s.x + 1.0) / c1 + (s.x - 1.0) / c2);
        let u_yy = 2.0
            - self.a
                * ((s.x + 1.0) * (s.x + 1.0) / c1 + (s.x - 1.0) * (s.x - 1.0) / c2);
        Ok((u_xx, u_xy, u_yy))
    }

    /// Eigenvalues of the linearization at `s`.
    ///
    /// The Jacobian always has the block form [[0, I], [−S, 0]] with S the
    /// (symmetric) potential Hessian, so its characteristic polynomial is
    /// biquadratic: λ⁴ + tr(S) λ² + det(S) = 0. Solving the quadratic in λ²
    /// and taking complex square roots yields exactly paired ±λ quadruples
    /// without a general eigensolver.
    pub fn linearization_eigenvalues(&self, s: &PhaseState) -> Result<[Complex64; 4]> {
        let (u_xx, u_xy, u_yy) = self.hessian_potential(s)?;
        let tr = u_xx + u_yy;
        let det = u_xx * u_yy - u_xy * u_xy;
        let disc = Complex64::new(tr * tr - 4.0 * det, 0.0).sqrt();
        let z1 = (Complex64::new(-tr, 0.0) + disc) / 2.0;
        let z2 = (Complex64::new(-tr, 0.0) - disc) / 2.0;
        let l1 = z1.sqrt();
        let l2 = z2.sqrt();
        let mut eigs = [l1, -l1, l2, -l2];
        eigs.sort_by(|p, q| {
            (p.re, p.im)
                .partial_cmp(&(q.re, q.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(eigs)
    }
}

/// A point (x, y, px, py) of the four-dimensional phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl PhaseState {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        Self { x, y, px, py }
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.px, self.py]
    }

    /// Distance to the center at (−1, 0).
    pub fn r1(&self) -> f64 {
        (self.x + 1.0).hypot(self.y)
    }

    /// Distance to the center at (+1, 0).
    pub fn r2(&self) -> f64 {
        (self.x - 1.0).hypot(self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Euclidean distance in phase space.
    pub fn distance(&self, other: &PhaseState) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        a.iter()
            .zip(&b)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt()
    }
}

/// Discrete symmetries of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// (x, y, px, py) → (−x, y, −px, py)
    S1,
    /// (x, y, px, py) → (x, −y, px, −py)
    S2,
    /// Composition of the two: reflection through the origin.
    S1S2,
}

/// Applies one of the discrete symmetries to a state.
pub fn apply_symmetry(sym: Symmetry, s: PhaseState) -> PhaseState {
    match sym {
        Symmetry::S1 => PhaseState::new(-s.x, s.y, -s.px, s.py),
        Symmetry::S2 => PhaseState::new(s.x, -s.y, s.px, -s.py),
        Symmetry::S1S2 => PhaseState::new(-s.x, -s.y, -s.px, -s.py),
    }
}

/// Spectral type of an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    /// All four eigenvalues purely imaginary.
    LinearCenter,
    /// One purely imaginary pair and one real pair.
    SaddleCenter,
    /// Anything else (zero or genuinely complex eigenvalues).
    Degenerate,
}

/// An equilibrium point with its linearization spectrum.
#[derive(Debug, Clone)]
pub struct EquilibriumPoint {
    pub state: PhaseState,
    pub eigenvalues: [Complex64; 4],
    pub kind: EquilibriumKind,
}

/// A time-sampled piece of the flow.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Strictly increasing sample times.
    pub times: Vec<f64>,
    /// States at the sample times (same length as `times`).
    pub states: Vec<PhaseState>,
    /// max over samples of |H(s(t)) − H(s(0))|.
    pub energy_drift: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&PhaseState> {
        self.states.last()
    }
}

fn classify(eigs: &[Complex64; 4]) -> EquilibriumKind {
    let imag = |l: &Complex64| l.re.abs() < PURE_IMAG_TOL * (1.0 + l.norm()) && l.im != 0.0;
    let real = |l: &Complex64| l.im.abs() < PURE_IMAG_TOL * (1.0 + l.norm()) && l.re != 0.0;
    let n_imag = eigs.iter().filter(|l| imag(l)).count();
    let n_real = eigs.iter().filter(|l| real(l)).count();
    match (n_imag, n_real) {
        (4, 0) => EquilibriumKind::LinearCenter,
        (2, 2) => EquilibriumKind::SaddleCenter,
        _ => EquilibriumKind::Degenerate,
    }
}

/// Equilibrium points of the flow.
///
/// For a > 1 there are five: the origin, the two potential minima (0, ±g)
/// and (±a, 0). For 0 ≤ a < 1 only the origin. The transition value a = 1
/// is rejected: the Hessian is degenerate there.
pub fn equilibria(p: &ModelParams) -> Result<Vec<EquilibriumPoint>> {
    if p.a() == 1.0 {
        return Err(Error::DegenerateParameter);
    }
    let mut states = vec![PhaseState::new(0.0, 0.0, 0.0, 0.0)];
    if let Some(g) = p.g() {
        states.push(PhaseState::new(0.0, g, 0.0, 0.0));
        states.push(PhaseState::new(0.0, -g, 0.0, 0.0));
        states.push(PhaseState::new(p.a(), 0.0, 0.0, 0.0));
        states.push(PhaseState::new(-p.a(), 0.0, 0.0, 0.0));
    }
    states
        .into_iter()
        .map(|state| {
            let eigenvalues = p.linearization_eigenvalues(&state)?;
            Ok(EquilibriumPoint {
                state,
                eigenvalues,
                kind: classify(&eigenvalues),
            })
        })
        .collect()
}
