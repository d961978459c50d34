//! Error types shared across the crate.

use crate::model::PhaseState;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The trajectory came within `delta` of one of the fixed centers, where
    /// the force field is singular.
    #[error("trajectory hit fixed center {which} (r = {r:.3e} <= {delta:.0e})")]
    SingularCenter { which: u8, r: f64, delta: f64 },

    /// The adaptive step controller stalled.
    #[error("step size underflow at t = {t:.6} (h = {h:.3e}): {reason}")]
    StepSizeUnderflow { t: f64, h: f64, reason: &'static str },

    /// `a = 1` is the pitchfork transition; the Hessian is degenerate there
    /// and equilibria are not classified.
    #[error("a = 1 is a degenerate transition point; equilibria are not classified there")]
    DegenerateParameter,

    /// The requested energy leaves no accessible region on the section.
    #[error("energy {energy} does not exceed the minimum section potential {min_potential}")]
    EmptyRegion { energy: f64, min_potential: f64 },

    /// Rejection sampling acceptance rate fell below the stall threshold.
    #[error("rejection sampling stalled after {attempts} attempts (acceptance rate < {rate:.0e})")]
    RejectionStall { attempts: u64, rate: f64 },

    /// `a` coincides with sqrt(N^2+1): the averaged functions vanish
    /// identically and first-order averaging gives no information.
    #[error("a = {a} is resonant (sqrt({n}^2+1) within {tol:.0e}); the averaged functions vanish identically")]
    ResonantParameter { a: f64, n: u32, tol: f64 },

    /// A precondition on a numeric argument was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// The branch index yields no admissible averaged zero.
    #[error("branch n = {n} is not admissible: {reason}")]
    InvalidBranch { n: i64, reason: String },

    /// Newton shooting failed to close the orbit; the best iterate is kept.
    #[error("shooting did not converge after {iters} iterations (closure = {closure:.3e})")]
    NoConvergence {
        iters: usize,
        closure: f64,
        best_ic: PhaseState,
        best_period: f64,
    },

    /// The shooting Jacobian lost rank beyond the two gauged directions.
    #[error("shooting Jacobian is rank-deficient (sigma_min/sigma_max = {ratio:.3e})")]
    SingularShooting { ratio: f64 },

    /// No monodromy report satisfies the closure precondition.
    #[error("no monodromy report has closure below {required:.0e}")]
    InsufficientEvidence { required: f64 },
}
