//! Static SVG of a sweep: tangles, ratio and magnetizations against the
//! field, stacked on a shared axis.

use std::fmt::Write;

use spin_ent::{SweepRow, Tau1Variant};

const WIDTH: f64 = 720.0;
const PANEL: f64 = 200.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const GAP: f64 = 40.0;

struct Series<'a> {
    name: &'a str,
    color: &'a str,
    points: Vec<(f64, f64)>,
}

struct Panel<'a> {
    title: &'a str,
    series: Vec<Series<'a>>,
}

pub struct Markers {
    pub h_f: Option<f64>,
    pub h_c: Option<f64>,
}

fn collect(rows: &[SweepRow], f: impl Fn(&SweepRow) -> Option<f64>) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.is_valid())
        .filter_map(|r| f(r).filter(|y| y.is_finite()).map(|y| (r.h, y)))
        .collect()
}

pub fn sweep_svg(title: &str, rows: &[SweepRow], variant: Tau1Variant, markers: &Markers) -> String {
    let tau1 = move |r: &SweepRow| match variant {
        Tau1Variant::Sym => r.tau1_sym,
        Tau1Variant::Broken => r.tau1_broken,
    };
    let panels = [
        Panel {
            title: "one-tangle and sum of squared concurrences",
            series: vec![
                Series { name: "tau1", color: "#1f77b4", points: collect(rows, |r| Some(tau1(r))) },
                Series { name: "tau2", color: "#d62728", points: collect(rows, |r| Some(r.tau2)) },
            ],
        },
        Panel {
            title: "entanglement ratio",
            series: vec![Series { name: "R", color: "#2ca02c", points: collect(rows, |r| r.ratio) }],
        },
        Panel {
            title: "magnetization",
            series: vec![
                Series { name: "Mz", color: "#9467bd", points: collect(rows, |r| Some(r.mz)) },
                Series { name: "Mx", color: "#ff7f0e", points: collect(rows, |r| Some(r.mx_longrange)) },
            ],
        },
    ];

    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let (mut x0, mut x1) = bounds(hs.iter().copied());
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let height = TOP + panels.len() as f64 * (PANEL + GAP) + 10.0;
    let plot_w = WIDTH - LEFT - RIGHT;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();

    for (k, panel) in panels.iter().enumerate() {
        let top = TOP + k as f64 * (PANEL + GAP);
        let bottom = top + PANEL;
        let (mut y0, mut y1) = bounds(panel.series.iter().flat_map(|se| se.points.iter().map(|p| p.1)));
        if !(y1 > y0) {
            y0 = if y0.is_finite() { y0 - 0.5 } else { 0.0 };
            y1 = y0 + 1.0;
        }
        let pad = 0.05 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let sy = |y: f64| bottom - (y - y0) / (y1 - y0) * PANEL;

        writeln!(s, r#"<rect x="{LEFT}" y="{top}" width="{plot_w}" height="{PANEL}" fill="none" stroke="black"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + plot_w / 2.0, top - 6.0, panel.title).unwrap();
        for i in 0..=4 {
            let x = x0 + (x1 - x0) * i as f64 / 4.0;
            writeln!(s, r#"<line x1="{0:.2}" y1="{bottom}" x2="{0:.2}" y2="{1}" stroke="black"/>"#, sx(x), bottom + 4.0).unwrap();
            writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{x:.3}</text>"#, sx(x), bottom + 16.0).unwrap();
            let y = y0 + (y1 - y0) * i as f64 / 4.0;
            writeln!(s, r#"<line x1="{}" y1="{1:.2}" x2="{LEFT}" y2="{1:.2}" stroke="black"/>"#, LEFT - 4.0, sy(y)).unwrap();
            writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{y:.3}</text>"#, LEFT - 6.0, sy(y) + 4.0).unwrap();
        }
        for (name, h, color) in [("h_f", markers.h_f, "#555555"), ("h_c", markers.h_c, "#aa0000")] {
            if let Some(h) = h.filter(|h| (x0..=x1).contains(h)) {
                writeln!(s, r#"<line x1="{0:.2}" y1="{top}" x2="{0:.2}" y2="{bottom}" stroke="{color}" stroke-dasharray="4 3"/>"#, sx(h)).unwrap();
                writeln!(s, r#"<text x="{:.2}" y="{}" fill="{color}">{name}</text>"#, sx(h) + 3.0, top + 12.0).unwrap();
            }
        }
        for (j, se) in panel.series.iter().enumerate() {
            if !se.points.is_empty() {
                let pts: Vec<String> = se.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, se.color, pts.join(" ")).unwrap();
            }
            let ly = top + 14.0 + 14.0 * j as f64;
            let lx = LEFT + plot_w - 60.0;
            writeln!(s, r#"<line x1="{lx}" y1="{0}" x2="{1}" y2="{0}" stroke="{2}" stroke-width="2"/>"#, ly - 4.0, lx + 16.0, se.color).unwrap();
            writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, lx + 20.0, se.name).unwrap();
        }
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">h</text>"#, LEFT + plot_w / 2.0, height - 2.0).unwrap();
    s.push_str("</svg>\n");
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
