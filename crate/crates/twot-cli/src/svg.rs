//! Minimal SVG line plots of result tables.

use std::fmt::Write;

use crate::config::Experiment;
use crate::experiments::RunOutput;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(v: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return None;
    }
    if hi - lo < 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

impl Plot {
    pub fn render(&self) -> String {
        let tx = |x: f64| if self.log_x { x.log10() } else { x };
        let ty = |y: f64| if self.log_y { y.log10() } else { y };
        let usable = |&(x, y): &(f64, f64)| {
            x.is_finite() && y.is_finite() && (!self.log_x || x > 0.0) && (!self.log_y || y > 0.0)
        };
        let pts = || self.series.iter().flat_map(|s| s.points.iter().filter(|p| usable(p)).copied());
        let mut svg = String::new();
        let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            (LEFT + W - RIGHT) / 2.0,
            escape(&self.title)
        );
        let (Some((x0, x1)), Some((y0, y1))) = (range(pts().map(|p| tx(p.0))), range(pts().map(|p| ty(p.1)))) else {
            svg.push_str("</svg>\n");
            return svg;
        };
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (ty(y) - y0) / (y1 - y0) * ph;
        let _ = writeln!(svg, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let (vx, vy) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let lx = if self.log_x { 10f64.powf(vx) } else { vx };
            let ly = if self.log_y { 10f64.powf(vy) } else { vy };
            let px = LEFT + f * pw;
            let py = TOP + ph - f * ph;
            let _ = writeln!(
                svg,
                r#"<text x="{px:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                TOP + ph + 16.0,
                tick(lx)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                py + 4.0,
                tick(ly)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let p: Vec<String> = s.points.iter().filter(|p| usable(p)).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            if p.is_empty() {
                continue;
            }
            let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, p.join(" "));
            for q in &p {
                let (x, y) = q.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(svg, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>"#);
            }
            let ly = TOP + 12.0 + 18.0 * k as f64;
            let lx = W - RIGHT + 12.0;
            let _ = writeln!(svg, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0);
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
                lx + 24.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn unique<T: PartialEq + Copy>(v: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Plots for one experiment run, as (file stem, plot).
pub fn plots(exp: Experiment, out: &RunOutput) -> Vec<(String, Plot)> {
    let rows = out.main_rows();
    let mut plots = Vec::new();
    match exp {
        Experiment::FidIters | Experiment::Qubits => {
            for (gamma, alpha) in unique(out.traces.iter().map(|t| (t.gamma, t.alpha))) {
                let series = out
                    .traces
                    .iter()
                    .filter(|t| t.gamma == gamma && t.alpha == alpha)
                    .map(|t| Series {
                        label: match t.seed {
                            Some(s) => format!("{} seed {s}", t.code),
                            None => t.code.clone(),
                        },
                        points: t.trace.records.iter().enumerate().map(|(i, r)| ((i + 1) as f64, r.fidelity)).collect(),
                    })
                    .collect();
                plots.push((
                    format!("{exp}_a{alpha}_g{gamma}"),
                    Plot {
                        title: format!("{exp}: alpha = {alpha}, gamma = {gamma}"),
                        x_label: "half-step".into(),
                        y_label: "entanglement fidelity".into(),
                        log_x: false,
                        log_y: false,
                        series,
                    },
                ));
            }
        }
        Experiment::FidAlpha | Experiment::Dephasing => {
            for gamma in unique(rows.iter().map(|r| r.gamma)) {
                let series = unique(rows.iter().map(|r| r.code.as_str()))
                    .into_iter()
                    .map(|code| Series {
                        label: code.to_string(),
                        points: rows
                            .iter()
                            .filter(|r| r.code == code && r.gamma == gamma)
                            .filter_map(|r| r.fidelity.map(|f| (r.alpha, f)))
                            .collect(),
                    })
                    .collect();
                plots.push((
                    format!("{exp}_g{gamma}"),
                    Plot {
                        title: format!("{exp}: gamma = {gamma}"),
                        x_label: "alpha".into(),
                        y_label: "entanglement fidelity".into(),
                        log_x: false,
                        log_y: false,
                        series,
                    },
                ));
            }
        }
        Experiment::InfidGamma => {
            let series = unique(rows.iter().map(|r| r.code.as_str()))
                .into_iter()
                .map(|code| Series {
                    label: code.to_string(),
                    points: rows.iter().filter(|r| r.code == code).filter_map(|r| r.infidelity().map(|e| (r.gamma, e))).collect(),
                })
                .collect();
            plots.push((
                exp.to_string(),
                Plot {
                    title: "minimum infidelity over alpha".into(),
                    x_label: "gamma".into(),
                    y_label: "1 - F".into(),
                    log_x: true,
                    log_y: true,
                    series,
                },
            ));
        }
        Experiment::Audit => {}
    }
    plots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_wellformed_document() {
        let p = Plot {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: true,
            log_y: false,
            series: vec![Series { label: "s".into(), points: vec![(0.0, 1.0), (1.0, 2.0), (10.0, 3.0)] }],
        };
        let s = p.render();
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<circle").count(), 2);
    }
}
