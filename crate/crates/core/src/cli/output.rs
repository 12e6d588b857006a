//! CSV and SVG writers. Both embed the tool version and the effective
//! configuration, and both are byte-deterministic.

use std::fmt::Write as _;

use crate::integrate::Trajectory;

/// `v` with 15 significant digits.
pub fn sig15(v: f64) -> String {
    format!("{v:.14e}")
}

/// Trajectory as CSV in original coordinates: `#` metadata lines, then
/// `t,x,y` or `t,x,y,z`, every `stride`-th sample plus the final one.
pub fn trajectory_csv(traj: &Trajectory, config_json: &str, stride: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# tumordde {}", crate::VERSION);
    let _ = writeln!(out, "# config {config_json}");
    let _ = writeln!(out, "# case {}", serde_json::to_string(&traj.meta.case).unwrap_or_default());
    let _ = writeln!(out, "# blew_up {}", traj.blew_up);
    out.push_str(if traj.dim == 3 { "t,x,y,z\n" } else { "t,x,y\n" });
    let n = traj.len();
    let stride = stride.max(1);
    let mut write_row = |k: usize| {
        out.push_str(&sig15(traj.times[k]));
        for v in traj.physical(k) {
            out.push(',');
            out.push_str(&sig15(v));
        }
        out.push('\n');
    };
    for k in (0..n).step_by(stride) {
        write_row(k);
    }
    if n > 0 && !(n - 1).is_multiple_of(stride) {
        write_row(n - 1);
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// A single line plot.
#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    pub annotation: Option<String>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const MAX_POINTS: usize = 4000;
const TICKS: usize = 5;

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1e-6);
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" { "0.0000".into() } else { s }
}

/// Self-contained SVG with axes, ticks, labels and a metadata element.
pub fn render_svg(plot: &Plot, metadata_json: &str) -> String {
    let step = plot.points.len().div_ceil(MAX_POINTS).max(1);
    let pts: Vec<(f64, f64)> = plot
        .points
        .iter()
        .copied()
        .step_by(step)
        .chain(plot.points.last().copied().filter(|_| !(plot.points.len() - 1).is_multiple_of(step)))
        .collect();
    let (x_lo, x_hi) = range(pts.iter().map(|p| p.0));
    let (y_lo, y_hi) = range(pts.iter().map(|p| p.1));
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |y: f64| MARGIN_T + ph - (y - y_lo) / (y_hi - y_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, "<metadata>{}</metadata>", escape(metadata_json));
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(&plot.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let (xv, yv) = (x_lo + f * (x_hi - x_lo), y_lo + f * (y_hi - y_lo));
        let (px, py) = (sx(xv), sy(yv));
        let base = MARGIN_T + ph;
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{base:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, base + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            base + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_L:.2}" y2="{py:.2}" stroke="black"/>"#, MARGIN_L - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            MARGIN_L - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 15.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        escape(&plot.y_label)
    );
    s.push_str(r#"<polyline fill="none" stroke="steelblue" stroke-width="1.2" points=""#);
    for (i, (x, y)) in pts.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.2},{:.2}", sx(*x), sy(*y));
    }
    s.push_str("\"/>\n");
    if let Some(note) = &plot.annotation {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" fill="firebrick">{}</text>"#,
            MARGIN_L + 10.0,
            MARGIN_T + 18.0,
            escape(note)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig15_has_fifteen_digits() {
        assert_eq!(sig15(0.1785714285714286), "1.78571428571429e-1");
        assert_eq!(sig15(0.0), "0.00000000000000e0");
    }

    #[test]
    fn svg_is_well_formed_and_deterministic() {
        let plot = Plot {
            title: "x & y".into(),
            x_label: "t".into(),
            y_label: "x".into(),
            points: (0..10_000).map(|k| (k as f64, (k as f64 * 0.01).sin())).collect(),
            annotation: Some("blow-up <here>".into()),
        };
        let a = render_svg(&plot, r#"{"a":"<b>"}"#);
        assert_eq!(a, render_svg(&plot, r#"{"a":"<b>"}"#));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("<metadata>{&quot;a&quot;:&quot;&lt;b&gt;&quot;}</metadata>"));
        assert!(a.contains("x &amp; y") && a.contains("blow-up &lt;here&gt;"));
        let n = a.split("points=\"").nth(1).unwrap().split('"').next().unwrap().split(' ').count();
        assert!(n <= MAX_POINTS + 1);
    }

    #[test]
    fn flat_series_gets_a_range() {
        let plot = Plot { title: String::new(), x_label: String::new(), y_label: String::new(), points: vec![(0.0, 1.0), (1.0, 1.0)], annotation: None };
        assert!(!render_svg(&plot, "{}").contains("NaN"));
    }
}
