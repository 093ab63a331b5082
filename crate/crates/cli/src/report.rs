//! CSV report rows and the hand-rolled SVG plot writer.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use sqfn_core::inequalities::Mode;
use sqfn_core::InequalityReport;

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub eps: Option<f64>,
    pub p: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub mode: Mode,
    pub pass: bool,
}

impl Row {
    pub fn from_report(r: &InequalityReport) -> Row {
        Row {
            name: r.name.clone(),
            alpha: r.params.get("alpha").copied(),
            lambda: r.params.get("lambda").copied(),
            eps: r.params.get("epsilon").copied(),
            p: r.params.get("p").copied(),
            lhs: r.lhs,
            rhs: r.rhs,
            margin: r.margin,
            mode: r.mode,
            pass: r.pass,
        }
    }

    pub fn strict_failure(&self) -> bool {
        self.mode == Mode::StrictBound && !self.pass
    }
}

fn opt_cmp(a: Option<f64>, b: Option<f64>) -> Ordering {
    let key = |x: Option<f64>| x.unwrap_or(f64::NEG_INFINITY);
    key(a).total_cmp(&key(b))
}

/// Deterministic order: by suite name, then by the parameter columns; ties
/// keep generation order (stable sort).
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| {
        a.name
            .cmp(&b.name)
            .then(opt_cmp(a.alpha, b.alpha))
            .then(opt_cmp(a.lambda, b.lambda))
            .then(opt_cmp(a.eps, b.eps))
            .then(opt_cmp(a.p, b.p))
    });
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from("name,alpha,lambda,eps,p,lhs,rhs,margin,mode,pass\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.name,
            num(r.alpha),
            num(r.lambda),
            num(r.eps),
            num(r.p),
            r.lhs,
            r.rhs,
            r.margin,
            r.mode,
            r.pass
        );
    }
    out
}

/// Minimal line plot: each series is (label, points); axes are fit to the
/// data range with a small margin.
pub fn svg_line_plot(path: &Path, title: &str, series: &[(String, Vec<(f64, f64)>)]) -> Result<()> {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 50.0;
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\">{title}</text>\n\
         <line x1=\"{PAD}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{}\" stroke=\"black\"/>\n",
        W / 2.0,
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD,
    );
    for (i, (label, points)) in series.iter().enumerate() {
        let color = colors[i % colors.len()];
        let path_d: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            path_d.join(" ")
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             fill=\"{color}\">{label}</text>",
            W - PAD - 160.0,
            PAD + 16.0 * (i + 1) as f64,
        );
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}
