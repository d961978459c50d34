//! High-accuracy time integration of the flow, event-detecting integration
//! for section crossings, and integration of the variational equations.

mod dop853;

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::model::{ModelParams, PhaseState, Trajectory};

pub(crate) use dop853::{propagate, Control, Step};

/// Time tolerance to which event crossings are localized.
pub const EVENT_TIME_TOL: f64 = 1e-12;

/// Crossings whose surface derivative magnitude falls below this are treated
/// as tangential contacts and discarded.
pub const TANGENT_SLOPE_TOL: f64 = 1e-4;

/// Dense sub-samples scanned per accepted step when hunting sign changes.
const EVENT_SUBSAMPLES: usize = 8;

/// Error-control and output settings for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Compute interpolation coefficients on accepted steps. Operations that
    /// need interpolation (events, sampling at requested times) enable this
    /// on their own.
    pub dense_output: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            dense_output: false,
        }
    }
}

impl IntegratorConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_step > 0.0
            && self.rel_tol.is_finite()
            && self.abs_tol.is_finite()
            && self.max_step.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "invalid integrator config: rel_tol={}, abs_tol={}, max_step={}",
                self.rel_tol, self.abs_tol, self.max_step
            )))
        }
    }
}

/// Required sign of d(surface)/dt at a reported crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// Surface increasing through zero (+1).
    Increasing,
    /// Surface decreasing through zero (−1).
    Decreasing,
    /// Either orientation (0); tangencies are still discarded.
    Any,
}

impl CrossingDirection {
    pub fn from_sign(sign: i8) -> Self {
        match sign.signum() {
            1 => Self::Increasing,
            -1 => Self::Decreasing,
            _ => Self::Any,
        }
    }

    fn accepts(self, slope: f64) -> bool {
        match self {
            Self::Increasing => slope > TANGENT_SLOPE_TOL,
            Self::Decreasing => slope < -TANGENT_SLOPE_TOL,
            Self::Any => slope.abs() > TANGENT_SLOPE_TOL,
        }
    }
}

/// A crossing surface g(s) = 0 with an orientation constraint.
#[derive(Debug, Clone)]
pub struct EventSpec<F>
where
    F: Fn(&PhaseState) -> f64,
{
    pub surface: F,
    pub direction: CrossingDirection,
}

impl<F: Fn(&PhaseState) -> f64> EventSpec<F> {
    pub fn new(surface: F, direction: CrossingDirection) -> Self {
        Self { surface, direction }
    }
}

/// The section surface used throughout: g(s) = x.
pub fn x_plane(direction: CrossingDirection) -> EventSpec<impl Fn(&PhaseState) -> f64 + Copy> {
    EventSpec::new(|s: &PhaseState| s.x, direction)
}

fn model_rhs(p: &ModelParams) -> impl FnMut(f64, &[f64; 4], &mut [f64; 4]) -> Result<()> + '_ {
    move |_t, y, dy| {
        *dy = p.vector_field(&PhaseState::from_array(*y))?;
        Ok(())
    }
}

fn check_ic(p: &ModelParams, ic: &PhaseState) -> Result<()> {
    if !ic.is_finite() {
        return Err(Error::Domain("initial state has non-finite components".into()));
    }
    p.vector_field(ic).map(|_| ())
}

/// Integrates the flow over `t_span`, recording the state at every accepted
/// step together with the worst energy drift seen.
pub fn integrate(
    p: &ModelParams,
    ic: &PhaseState,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::Domain(format!("need t1 > t0, got ({t0}, {t1})")));
    }
    check_ic(p, ic)?;
    let e0 = p.hamiltonian(ic);
    let mut times = vec![t0];
    let mut states = vec![*ic];
    let mut drift = 0.0f64;
    let mut rhs = model_rhs(p);
    propagate(&mut rhs, t0, ic.to_array(), t1, cfg, false, &mut |step: &Step<'_, 4>| {
        let s = PhaseState::from_array(*step.y1);
        drift = drift.max((p.hamiltonian(&s) - e0).abs());
        times.push(step.t1);
        states.push(s);
        Ok(Control::Continue)
    })?;
    Ok(Trajectory {
        times,
        states,
        energy_drift: drift,
    })
}

/// Integrates the flow and samples it at the caller-requested times, which
/// must be strictly increasing and contained in `t_span`.
pub fn integrate_at(
    p: &ModelParams,
    ic: &PhaseState,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    times: &[f64],
) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::Domain(format!("need t1 > t0, got ({t0}, {t1})")));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("sample times must be strictly increasing".into()));
    }
    if times.first().is_some_and(|&t| t < t0) || times.last().is_some_and(|&t| t > t1) {
        return Err(Error::Domain("sample times must lie within t_span".into()));
    }
    check_ic(p, ic)?;
    let e0 = p.hamiltonian(ic);
    let mut out_times = Vec::with_capacity(times.len());
    let mut states = Vec::with_capacity(times.len());
    let mut drift = 0.0f64;
    let mut idx = 0;
    while idx < times.len() && times[idx] <= t0 {
        out_times.push(times[idx]);
        states.push(*ic);
        idx += 1;
    }
    let mut rhs = model_rhs(p);
    propagate(&mut rhs, t0, ic.to_array(), t1, cfg, true, &mut |step: &Step<'_, 4>| {
        while idx < times.len() && times[idx] <= step.t1 {
            let y = if times[idx] == step.t1 {
                *step.y1
            } else {
                step.dense.expect("dense output requested").eval(times[idx])
            };
            let s = PhaseState::from_array(y);
            drift = drift.max((p.hamiltonian(&s) - e0).abs());
            out_times.push(times[idx]);
            states.push(s);
            idx += 1;
        }
        Ok(if idx == times.len() {
            Control::Stop
        } else {
            Control::Continue
        })
    })?;
    Ok(Trajectory {
        times: out_times,
        states,
        energy_drift: drift,
    })
}

/// State at time `t` starting from `ic` at time zero; `t` may be negative.
pub fn flow_map(
    p: &ModelParams,
    ic: &PhaseState,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<PhaseState> {
    check_ic(p, ic)?;
    if t == 0.0 {
        return Ok(*ic);
    }
    let mut rhs = model_rhs(p);
    let y = propagate(&mut rhs, 0.0, ic.to_array(), t, cfg, false, &mut |_: &Step<'_, 4>| {
        Ok(Control::Continue)
    })?;
    Ok(PhaseState::from_array(y))
}

/// All crossings of the event surface over `t_span`, in time order. Each
/// crossing is localized to [`EVENT_TIME_TOL`] in time and the reported
/// state satisfies |surface| ≤ 1e−12. Tangential contacts are discarded.
///
/// A state that starts exactly on the surface does not count as a crossing.
pub fn integrate_events<F>(
    p: &ModelParams,
    ic: &PhaseState,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    ev: &EventSpec<F>,
) -> Result<Vec<(f64, PhaseState)>>
where
    F: Fn(&PhaseState) -> f64,
{
    events_with_drift(p, ic, t_span, cfg, ev).map(|(crossings, _)| crossings)
}

/// Event integration that also reports the worst energy drift along the
/// trajectory (one pass; used by the section batch).
pub(crate) fn events_with_drift<F>(
    p: &ModelParams,
    ic: &PhaseState,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    ev: &EventSpec<F>,
) -> Result<(Vec<(f64, PhaseState)>, f64)>
where
    F: Fn(&PhaseState) -> f64,
{
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::Domain(format!("need t1 > t0, got ({t0}, {t1})")));
    }
    check_ic(p, ic)?;
    let e0 = p.hamiltonian(ic);
    let mut crossings: Vec<(f64, PhaseState)> = Vec::new();
    let mut drift = 0.0f64;
    let mut rhs = model_rhs(p);
    propagate(&mut rhs, t0, ic.to_array(), t1, cfg, true, &mut |step: &Step<'_, 4>| {
        let s1 = PhaseState::from_array(*step.y1);
        drift = drift.max((p.hamiltonian(&s1) - e0).abs());

        let dense = step.dense.expect("dense output requested");
        let mut t_prev = step.t0;
        let mut g_prev = (ev.surface)(&PhaseState::from_array(*step.y0));
        for j in 1..=EVENT_SUBSAMPLES {
            let tj = if j == EVENT_SUBSAMPLES {
                step.t1
            } else {
                step.t0 + (step.t1 - step.t0) * (j as f64) / (EVENT_SUBSAMPLES as f64)
            };
            let sj = if j == EVENT_SUBSAMPLES {
                PhaseState::from_array(*step.y1)
            } else {
                PhaseState::from_array(dense.eval(tj))
            };
            let gj = (ev.surface)(&sj);
            let bracketed = g_prev * gj < 0.0 || (gj == 0.0 && g_prev != 0.0);
            if bracketed {
                if let Some(hit) = localize_crossing(p, ev, dense, t_prev, tj, g_prev)? {
                    crossings.push(hit);
                }
            }
            t_prev = tj;
            g_prev = gj;
        }
        Ok(Control::Continue)
    })?;
    Ok((crossings, drift))
}

/// Bisects the interpolant down to the time tolerance, then pins the state
/// onto the surface by Newton steps along the flow direction.
fn localize_crossing<F>(
    p: &ModelParams,
    ev: &EventSpec<F>,
    dense: &dop853::DenseOutput<4>,
    t_lo: f64,
    t_hi: f64,
    g_lo: f64,
) -> Result<Option<(f64, PhaseState)>>
where
    F: Fn(&PhaseState) -> f64,
{
    let (mut a, mut b) = (t_lo, t_hi);
    let mut g_a = g_lo;
    while b - a > EVENT_TIME_TOL {
        let mid = 0.5 * (a + b);
        let g_mid = (ev.surface)(&PhaseState::from_array(dense.eval(mid)));
        if g_mid == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if g_a * g_mid < 0.0 {
            b = mid;
        } else {
            a = mid;
            g_a = g_mid;
        }
    }
    let mut t_c = 0.5 * (a + b);
    let mut s = PhaseState::from_array(dense.eval(t_c));

    // Newton along the flow: surface derivative by a centered difference in
    // the flow direction, then a first-order time shift. The shift is of the
    // order of the interpolation error, so one or two rounds reach 1e-15.
    let mut slope = 0.0;
    for _ in 0..3 {
        let f = p.vector_field(&s)?;
        let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let eps = 1e-7 / fnorm;
        let probe = |sign: f64| {
            let arr = s.to_array();
            let mut q = arr;
            for i in 0..4 {
                q[i] = arr[i] + sign * eps * f[i];
            }
            (ev.surface)(&PhaseState::from_array(q))
        };
        slope = (probe(1.0) - probe(-1.0)) / (2.0 * eps);
        let g = (ev.surface)(&s);
        if slope == 0.0 || g == 0.0 {
            break;
        }
        let dt = -g / slope;
        let mut arr = s.to_array();
        for i in 0..4 {
            arr[i] += dt * f[i];
        }
        s = PhaseState::from_array(arr);
        t_c += dt;
        if dt.abs() < 1e-16 * t_c.abs().max(1.0) {
            break;
        }
    }

    if ev.direction.accepts(slope) {
        Ok(Some((t_c, s)))
    } else {
        Ok(None)
    }
}

/// Integrates the variational equations Ṁ = J(s(t)) M alongside the flow as
/// one 20-dimensional system under the same error control, starting from
/// M(0) = I. Returns the final state and the fundamental matrix M(t).
pub fn integrate_variational(
    p: &ModelParams,
    ic: &PhaseState,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<(PhaseState, Matrix4<f64>)> {
    check_ic(p, ic)?;
    if t == 0.0 {
        return Ok((*ic, Matrix4::identity()));
    }
    let mut y0 = [0.0f64; 20];
    y0[..4].copy_from_slice(&ic.to_array());
    for r in 0..4 {
        y0[4 + 5 * r] = 1.0; // identity, row-major at offset 4
    }
    let mut rhs = |_t: f64, y: &[f64; 20], dy: &mut [f64; 20]| -> Result<()> {
        let s = PhaseState::new(y[0], y[1], y[2], y[3]);
        let f = p.vector_field(&s)?;
        dy[..4].copy_from_slice(&f);
        let (u_xx, u_xy, u_yy) = p.hessian_potential(&s)?;
        for c in 0..4 {
            let m0 = y[4 + c];
            let m1 = y[8 + c];
            let m2 = y[12 + c];
            let m3 = y[16 + c];
            dy[4 + c] = m2;
            dy[8 + c] = m3;
            dy[12 + c] = -u_xx * m0 - u_xy * m1;
            dy[16 + c] = -u_xy * m0 - u_yy * m1;
        }
        Ok(())
    };
    let y = propagate(&mut rhs, 0.0, y0, t, cfg, false, &mut |_: &Step<'_, 20>| {
        Ok(Control::Continue)
    })?;
    let state = PhaseState::new(y[0], y[1], y[2], y[3]);
    let m = Matrix4::from_fn(|r, c| y[4 + 4 * r + c]);
    Ok((state, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{apply_symmetry, Symmetry};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, SQRT_2};

    fn params(a: f64) -> ModelParams {
        ModelParams::new(a).unwrap()
    }

    #[test]
    fn isotropic_oscillator_closes_after_one_period() {
        // a = 0: U = x² + y² + 1, angular frequency sqrt(2), period sqrt(2)π.
        let p = params(0.0);
        let ic = PhaseState::new(1.0, 0.0, 0.0, 1.0);
        let cfg = IntegratorConfig::default();
        let traj = integrate(&p, &ic, (0.0, SQRT_2 * PI), &cfg).unwrap();
        let end = traj.states.last().unwrap();
        assert!(end.distance(&ic) < 1e-9, "closure {}", end.distance(&ic));
        assert!(traj.energy_drift < 1e-11);
    }

    #[test]
    fn equilibrium_stays_fixed() {
        let p = params(1.5);
        let g = p.g().unwrap();
        let ic = PhaseState::new(0.0, g, 0.0, 0.0);
        let traj = integrate(&p, &ic, (0.0, 25.0), &IntegratorConfig::default()).unwrap();
        for s in &traj.states {
            assert!(s.distance(&ic) < 1e-12);
        }
        assert!(traj.energy_drift < 1e-15);
    }

    #[test]
    fn flow_map_identity_at_zero_time() {
        let p = params(2.0);
        let ic = PhaseState::new(0.3, 1.0, -0.2, 0.4);
        let out = flow_map(&p, &ic, 0.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(out, ic);
    }

    #[test]
    fn flow_map_reverses() {
        let p = params(2.0);
        let ic = PhaseState::new(0.2, 1.4, 0.3, -0.1);
        let cfg = IntegratorConfig::default();
        let fwd = flow_map(&p, &ic, 100.0, &cfg).unwrap();
        let back = flow_map(&p, &fwd, -100.0, &cfg).unwrap();
        assert!(back.distance(&ic) < 1e-8, "reversal error {}", back.distance(&ic));
    }

    #[test]
    fn flow_map_commutes_with_symmetry() {
        let p = params(1.5);
        let ic = PhaseState::new(0.1, 0.9, 0.2, -0.3);
        let cfg = IntegratorConfig::default();
        let t = 37.5;
        let a = flow_map(&p, &apply_symmetry(Symmetry::S2, ic), t, &cfg).unwrap();
        let b = apply_symmetry(Symmetry::S2, flow_map(&p, &ic, t, &cfg).unwrap());
        assert!(a.distance(&b) < 1e-8);
    }

    #[test]
    fn dense_sampling_matches_direct_integration() {
        let p = params(1.5);
        let ic = PhaseState::new(0.0, 1.0, 0.4, 0.2);
        let cfg = IntegratorConfig::default();
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.31).collect();
        let traj = integrate_at(&p, &ic, (0.0, 12.5), &cfg, &times).unwrap();
        assert_eq!(traj.times.len(), times.len());
        for (i, &t) in times.iter().enumerate().step_by(7) {
            let direct = flow_map(&p, &ic, t, &cfg).unwrap();
            assert!(
                traj.states[i].distance(&direct) < 1e-9,
                "dense error {} at t={t}",
                traj.states[i].distance(&direct)
            );
        }
    }

    #[test]
    fn oscillator_quarter_period_crossing() {
        // x(t) = cos(sqrt(2) t) first hits x = 0 (decreasing) at t = π/(2 sqrt(2)).
        let p = params(0.0);
        let ic = PhaseState::new(1.0, 0.0, 0.0, 0.0);
        let ev = x_plane(CrossingDirection::Decreasing);
        let hits = integrate_events(&p, &ic, (0.0, 4.0), &IntegratorConfig::default(), &ev).unwrap();
        assert!(!hits.is_empty());
        let (t, s) = hits[0];
        assert_abs_diff_eq!(t, PI / (2.0 * SQRT_2), epsilon = 1e-10);
        assert!(s.x.abs() <= 1e-12);
        assert!(s.px < 0.0);
    }

    #[test]
    fn no_events_from_equilibrium_on_surface() {
        let p = params(2.0);
        let ic = PhaseState::new(0.0, 3.0_f64.sqrt(), 0.0, 0.0);
        let ev = x_plane(CrossingDirection::Any);
        let hits = integrate_events(&p, &ic, (0.0, 30.0), &IntegratorConfig::default(), &ev).unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn event_states_obey_surface_and_direction() {
        let p = params(1.5);
        let ic = PhaseState::new(0.0, 1.2, 0.5, 0.1);
        let ev = x_plane(CrossingDirection::Increasing);
        let hits = integrate_events(&p, &ic, (0.0, 200.0), &IntegratorConfig::default(), &ev).unwrap();
        assert!(hits.len() > 3);
        for (t, s) in &hits {
            assert!(s.x.abs() <= 1e-12, "|x| = {:e} at t={t}", s.x.abs());
            assert!(s.px > TANGENT_SLOPE_TOL);
        }
        for w in hits.windows(2) {
            assert!(w[1].0 > w[0].0);
        }
    }

    #[test]
    fn variational_identity_at_zero_time() {
        let p = params(2.0);
        let ic = PhaseState::new(0.1, 1.5, 0.0, 0.2);
        let (s, m) = integrate_variational(&p, &ic, 0.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(s, ic);
        assert_eq!(m, Matrix4::identity());
    }

    #[test]
    fn variational_preserves_volume() {
        let p = params(1.5);
        let ic = PhaseState::new(0.05, 1.1, 0.3, -0.2);
        let (_, m) =
            integrate_variational(&p, &ic, 50.0, &IntegratorConfig::default()).unwrap();
        assert!((m.determinant() - 1.0).abs() < 1e-6, "det M = {}", m.determinant());
    }

    #[test]
    fn variational_short_time_taylor() {
        let p = params(2.0);
        let ic = PhaseState::new(0.2, 1.2, -0.1, 0.3);
        let t = 1e-3;
        let (_, m) = integrate_variational(&p, &ic, t, &IntegratorConfig::default()).unwrap();
        let j = p.jacobian_vf(&ic).unwrap();
        let lin = Matrix4::identity() + j * t;
        let diff = (m - lin).norm();
        assert!(diff < 5.0 * t * t, "‖M − (I + tJ)‖ = {diff}");
    }

    #[test]
    fn starting_inside_the_singular_radius_is_reported() {
        let p = params(0.5);
        let ic = PhaseState::new(1.0 + 1e-13, 0.0, 0.2, 0.0);
        let res = integrate(&p, &ic, (0.0, 5.0), &IntegratorConfig::default());
        assert!(matches!(res, Err(Error::SingularCenter { which: 2, .. })));
    }

    #[test]
    fn kink_passage_on_the_center_line_keeps_integrating() {
        // Along y = 0 the force direction flips at the centers (derivative
        // discontinuity); the controller crosses with small steps instead of
        // stalling, at some cost in local drift.
        let p = params(0.5);
        let ic = PhaseState::new(0.0, 0.0, 2.0, 0.0);
        let traj = integrate(&p, &ic, (0.0, 5.0), &IntegratorConfig::default()).unwrap();
        assert!(traj.energy_drift < 1e-7, "drift {}", traj.energy_drift);
    }

    #[test]
    fn rejects_bad_spans_and_configs() {
        let p = params(1.5);
        let ic = PhaseState::new(0.0, 1.0, 0.0, 0.0);
        assert!(integrate(&p, &ic, (1.0, 1.0), &IntegratorConfig::default()).is_err());
        let bad = IntegratorConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(integrate(&p, &ic, (0.0, 1.0), &bad).is_err());
    }
}
