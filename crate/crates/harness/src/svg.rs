//! Minimal SVG writers: log-log sweep plots and ellipse overlays.

use std::fmt::Write as _;

use varfilt_core::filters::FilterKind;

use crate::ellipse::EllipseExperiment;
use crate::sweep::SweepRecord;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 5] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mse,
    Wcse,
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn log(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| *v > 0.0 && v.is_finite()) {
            lo = lo.min(v.log10());
            hi = hi.max(v.log10());
        }
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        Axis { lo: lo.floor(), hi: hi.ceil().max(lo.floor() + 1.0) }
    }

    fn frac(&self, v: f64) -> f64 {
        (v.max(1e-300).log10() - self.lo) / (self.hi - self.lo)
    }
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
}

/// Log-log plot of one metric against dimension, with 93% interval bars.
/// Each filter is nudged slightly along x so overlapping bars stay visible.
pub fn sweep_svg(records: &[SweepRecord], metric: Metric) -> String {
    let pick = |r: &SweepRecord| match metric {
        Metric::Mse => (r.mse_lo, r.mse_mean, r.mse_hi),
        Metric::Wcse => (r.wcse_lo, r.wcse_mean, r.wcse_hi),
    };
    let xa = Axis::log(records.iter().map(|r| r.dim as f64));
    let ya = Axis::log(records.iter().flat_map(|r| {
        let (a, b, c) = pick(r);
        [a, b, c]
    }));
    let px = |d: f64| MARGIN + xa.frac(d) * (W - 2.0 * MARGIN);
    let py = |v: f64| H - MARGIN - ya.frac(v) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    header(
        &mut s,
        match metric {
            Metric::Mse => "mean square error",
            Metric::Wcse => "worst-case scaled error",
        },
    );
    let mut e = xa.lo;
    while e <= xa.hi {
        let x = px(10f64.powf(e));
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">1e{e}</text>"#,
            H - MARGIN + 16.0
        );
        e += 1.0;
    }
    let mut e = ya.lo;
    while e <= ya.hi {
        let y = py(10f64.powf(e));
        let _ =
            writeln!(s, r#"<text x="{:.1}" y="{y:.1}" font-size="11" text-anchor="end">1e{e}</text>"#, MARGIN - 6.0);
        e += 1.0;
    }

    for (slot, kind) in FilterKind::ALL.iter().enumerate() {
        let rows: Vec<&SweepRecord> = records.iter().filter(|r| r.filter == *kind).collect();
        if rows.is_empty() {
            continue;
        }
        let color = COLORS[slot % COLORS.len()];
        let nudge = 1.0 + 0.03 * (slot as f64 - 2.0);
        let mut path = String::new();
        for r in &rows {
            let (lo, mean, hi) = pick(r);
            let x = px(r.dim as f64 * nudge);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{color}"/>"#,
                py(lo),
                py(hi)
            );
            let _ = write!(path, "{}{x:.1},{:.1}", if path.is_empty() { "M" } else { " L" }, py(mean));
        }
        let _ = writeln!(s, r#"<path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="{color}">{kind}</text>"#,
            W - MARGIN + 4.0,
            MARGIN + 14.0 * slot as f64 + 10.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Both metrics side by side in one document.
pub fn sweep_svg_pair(records: &[SweepRecord]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{H}">"#, 2.0 * W);
    for (k, metric) in [Metric::Mse, Metric::Wcse].into_iter().enumerate() {
        let inner = sweep_svg(records, metric);
        let inner = inner.replacen("<svg ", &format!(r#"<svg x="{}" "#, k as f64 * W), 1);
        s.push_str(&inner);
    }
    s.push_str("</svg>\n");
    s
}

/// Overlay of the ellipses in an [`EllipseExperiment`].
pub fn ellipse_svg(exp: &EllipseExperiment) -> String {
    let pts = exp.sets.iter().flat_map(|s| s.points.iter());
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let scale = (H - 2.0 * MARGIN) / span;
    let mut s = String::new();
    header(&mut s, &format!("seed {} after {} observations", exp.seed, exp.obs));
    for (slot, set) in exp.sets.iter().enumerate() {
        let color = COLORS[slot % COLORS.len()];
        let mut path = String::new();
        for p in &set.points {
            let x = MARGIN + (p[0] - lo[0]) * scale;
            let y = H - MARGIN - (p[1] - lo[1]) * scale;
            let _ = write!(path, "{}{x:.2},{y:.2}", if path.is_empty() { "M" } else { " L" });
        }
        let _ = writeln!(s, r#"<path d="{path} Z" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="{color}">{}</text>"#,
            W - MARGIN + 4.0,
            MARGIN + 14.0 * slot as f64 + 10.0,
            set.method
        );
    }
    s.push_str("</svg>\n");
    s
}
