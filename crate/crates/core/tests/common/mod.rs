//! Shared helpers for the integration-test targets: an adaptive quadrature
//! oracle and finite-difference utilities, kept independent of the library's
//! closed forms on purpose.

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(f, a, fa, m, fm);
        let (right, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, flm, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, frm, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, fm, tol, 40)
}

/// Central-difference Jacobian determinant of a 2D map.
#[allow(dead_code)]
pub fn fd_jacobian_det<F>(f: F, x: f64, y: f64) -> f64
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let dx = 1e-6 * x.abs().max(1.0);
    let dy = 1e-6 * y.abs().max(1.0);
    let (f1_px, f2_px) = f(x + dx, y);
    let (f1_mx, f2_mx) = f(x - dx, y);
    let (f1_py, f2_py) = f(x, y + dy);
    let (f1_my, f2_my) = f(x, y - dy);
    let j11 = (f1_px - f1_mx) / (2.0 * dx);
    let j21 = (f2_px - f2_mx) / (2.0 * dx);
    let j12 = (f1_py - f1_my) / (2.0 * dy);
    let j22 = (f2_py - f2_my) / (2.0 * dy);
    j11 * j22 - j12 * j21
}

#[allow(dead_code)]
pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}
