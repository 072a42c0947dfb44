//! Minimal self-contained SVG: one panel per state channel (estimate over
//! truth), one per error channel and one per auxiliary channel.

use std::fmt::Write as _;

use idobs_core::ode::StateTrace;

const WIDTH: f64 = 900.0;
const PANEL_H: f64 = 140.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const GAP: f64 = 30.0;
const MAX_POINTS: usize = 2000;

struct Series<'a> {
    values: Vec<f64>,
    colour: &'a str,
}

fn polyline(out: &mut String, times: &[f64], s: &Series<'_>, y0: f64, lo: f64, hi: f64) {
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let sx = (WIDTH - MARGIN_L - MARGIN_R) / (t1 - t0).max(f64::MIN_POSITIVE);
    let sy = PANEL_H / (hi - lo);
    let _ = write!(out, r#"<polyline fill="none" stroke="{}" stroke-width="1" points=""#, s.colour);
    for (t, v) in times.iter().zip(&s.values) {
        if v.is_finite() {
            let x = MARGIN_L + (t - t0) * sx;
            let y = y0 + PANEL_H - (v.clamp(lo, hi) - lo) * sy;
            let _ = write!(out, "{x:.2},{y:.2} ");
        }
    }
    out.push_str("\"/>\n");
}

fn panel(out: &mut String, idx: usize, title: &str, times: &[f64], series: &[Series<'_>]) {
    let y0 = GAP + idx as f64 * (PANEL_H + GAP);
    let finite = series.iter().flat_map(|s| s.values.iter()).filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN_L}" y="{y0}" width="{}" height="{PANEL_H}" fill="none" stroke="#999"/>"##,
        WIDTH - MARGIN_L - MARGIN_R
    );
    let _ = writeln!(out, r#"<text x="{MARGIN_L}" y="{}" font-size="12">{title}</text>"#, y0 - 6.0);
    let _ = writeln!(out, r#"<text x="4" y="{}" font-size="10">{hi:.3e}</text>"#, y0 + 10.0);
    let _ = writeln!(out, r#"<text x="4" y="{}" font-size="10">{lo:.3e}</text>"#, y0 + PANEL_H);
    for s in series {
        polyline(out, times, s, y0, lo, hi);
    }
}

pub fn render(trace: &StateTrace, title: &str) -> String {
    let stride = trace.len().div_ceil(MAX_POINTS).max(1);
    let tr = trace.decimate(stride);
    let w = tr.width;
    let panels = 2 * w + tr.extra_count();
    let height = GAP + panels as f64 * (PANEL_H + GAP);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<text x="{MARGIN_L}" y="16" font-size="14">{title}</text>"#);
    let mut idx = 0;
    for i in 0..w {
        let name = format!("x{} (blue) vs ref{} (grey)", i + 1, i + 1);
        let series = [
            Series { values: tr.ref_column(i), colour: "#aaa" },
            Series { values: tr.state_column(i), colour: "#1f5fbf" },
        ];
        panel(&mut out, idx, &name, &tr.times, &series);
        idx += 1;
    }
    for i in 0..w {
        let series = [Series { values: tr.error_column(i), colour: "#c03020" }];
        panel(&mut out, idx, &format!("e{}", i + 1), &tr.times, &series);
        idx += 1;
    }
    for name in &tr.extra_names {
        let series = [Series { values: tr.extra_column(name).unwrap_or_default(), colour: "#2a8a3a" }];
        panel(&mut out, idx, name, &tr.times, &series);
        idx += 1;
    }
    out.push_str("</svg>\n");
    out
}
