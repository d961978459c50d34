//! CSV and SVG emission. Floats are written in Rust's shortest round-trip
//! form so identical data always serializes to identical bytes.

use std::fmt::Write as _;

use twocenter::sections::SectionRun;

pub fn section_csv(run: &SectionRun) -> String {
    let mut out = String::with_capacity(32 * run.points.len() + 16);
    out.push_str("ic_index,t,y,py\n");
    for p in &run.points {
        let _ = writeln!(out, "{},{},{},{}", p.ic_index, p.t, p.y, p.py);
    }
    out
}

pub fn trajectory_csv(times: &[f64], states: &[twocenter::model::PhaseState]) -> String {
    let mut out = String::with_capacity(48 * times.len() + 16);
    out.push_str("t,x,y,px,py\n");
    for (t, s) in times.iter().zip(states) {
        let _ = writeln!(out, "{},{},{},{},{}", t, s.x, s.y, s.px, s.py);
    }
    out
}

pub fn lyapunov_csv(checkpoints: &[(f64, f64)]) -> String {
    let mut out = String::with_capacity(24 * checkpoints.len() + 16);
    out.push_str("t,lambda\n");
    for (t, lam) in checkpoints {
        let _ = writeln!(out, "{},{}", t, lam);
    }
    out
}

pub fn grid_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::with_capacity(32 * rows.len() + 8);
    out.push_str("x,y,u\n");
    for (x, y, u) in rows {
        let _ = writeln!(out, "{},{},{}", x, y, u);
    }
    out
}

/// Fixed-layout scatter plot of section points on the (y, py) plane.
pub fn section_svg(run: &SectionRun, title: &str) -> String {
    const W: f64 = 800.0;
    const H: f64 = 600.0;
    const M: f64 = 60.0;

    let (mut y_min, mut y_max) = (f64::MAX, f64::MIN);
    let (mut p_min, mut p_max) = (f64::MAX, f64::MIN);
    for p in &run.points {
        y_min = y_min.min(p.y);
        y_max = y_max.max(p.y);
        p_min = p_min.min(p.py);
        p_max = p_max.max(p.py);
    }
    if run.points.is_empty() {
        y_min = -1.0;
        y_max = 1.0;
        p_min = -1.0;
        p_max = 1.0;
    }
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = (*hi - *lo).max(1e-12);
        *lo -= 0.05 * span;
        *hi += 0.05 * span;
    };
    pad(&mut y_min, &mut y_max);
    pad(&mut p_min, &mut p_max);

    let sx = (W - 2.0 * M) / (y_max - y_min);
    let sy = (H - 2.0 * M) / (p_max - p_min);
    let px = |y: f64| M + (y - y_min) * sx;
    let py = |p: f64| H - M - (p - p_min) * sy;

    let mut svg = String::with_capacity(64 * run.points.len() + 1024);
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"24\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        W / 2.0,
        title
    );
    // axes box
    let _ = writeln!(
        svg,
        "<rect x=\"{M}\" y=\"{M}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * M,
        H - 2.0 * M
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">y</text>",
        W / 2.0,
        H - 20.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"20\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.1})\">py</text>",
        H / 2.0,
        H / 2.0
    );
    for lbl in [(y_min, y_max, true), (p_min, p_max, false)] {
        let (lo, hi, horizontal) = lbl;
        for (frac, v) in [(0.0, lo), (1.0, hi)] {
            if horizontal {
                let _ = writeln!(
                    svg,
                    "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"middle\">{:.4}</text>",
                    M + frac * (W - 2.0 * M),
                    H - M + 16.0,
                    v
                );
            } else {
                let _ = writeln!(
                    svg,
                    "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{:.4}</text>",
                    M - 6.0,
                    H - M - frac * (H - 2.0 * M) + 4.0,
                    v
                );
            }
        }
    }
    for p in &run.points {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"0.8\" fill=\"black\" fill-opacity=\"0.55\"/>",
            px(p.y),
            py(p.py)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
