//! Static SVG figures from experiment CSV files.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiments::Table;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Representation distance against chordal distance, with the ratio-1 line.
    Scatter,
    /// Kernel density of `ln(ratio)` per projection and ratio pair.
    Density,
    /// Negative-gradient arrows of a planar distance field.
    VecField,
    /// Optimization paths of the raw vectors, projected on the x-y plane.
    Paths,
}

impl PlotKind {
    fn required(self) -> &'static [&'static str] {
        match self {
            PlotKind::Scatter => &["d_so3", "d_repr"],
            PlotKind::Density => &["projection", "ratio_pair", "ratio"],
            PlotKind::VecField => &["y1", "y2", "gx", "gy", "defined"],
            PlotKind::Paths => &["run", "iter", "vector", "comp_x", "comp_y"],
        }
    }
}

impl FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scatter" => Ok(PlotKind::Scatter),
            "density" => Ok(PlotKind::Density),
            "vecfield" => Ok(PlotKind::VecField),
            "paths" => Ok(PlotKind::Paths),
            _ => Err(Error::Config(vec![format!(
                "unknown plot kind `{s}` (scatter, density, vecfield or paths)"
            )])),
        }
    }
}

struct Canvas {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
    meta: Vec<(String, String)>,
}

impl Canvas {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if !(lo.is_finite() && hi.is_finite()) {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        Canvas {
            x: widen(x),
            y: widen(y),
            body: String::new(),
            meta: Vec::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }

    fn circle(&mut self, x: f64, y: f64, color: &str) {
        let (cx, cy) = (self.px(x), self.py(y));
        let _ = writeln!(self.body, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="1.5" fill="{color}" fill-opacity="0.5"/>"#);
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str, dash: bool) {
        if pts.is_empty() {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y))).collect();
        let dash = if dash { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"{dash}/>"#,
            coords.join(" ")
        );
    }

    fn arrow(&mut self, x: f64, y: f64, dx: f64, dy: f64, color: &str) {
        let (x0, y0) = (self.px(x), self.py(y));
        let (x1, y1) = (self.px(x + dx), self.py(y + dy));
        let _ = writeln!(
            self.body,
            r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="{color}" stroke-width="1" marker-end="url(#head)"/>"#
        );
    }

    fn legend(&mut self, i: usize, label: &str, color: &str) {
        let y = MARGIN + 14.0 * i as f64;
        let x = W - MARGIN - 150.0;
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.0}" y="{:.0}" width="10" height="10" fill="{color}"/><text x="{:.0}" y="{:.0}" font-size="11">{}</text>"#,
            y - 9.0,
            x + 14.0,
            y,
            escape(label)
        );
    }

    fn finish(self, xlabel: &str, ylabel: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif">"#
        );
        if !self.meta.is_empty() {
            s.push_str("<metadata>");
            for (k, v) in &self.meta {
                let _ = write!(s, r#"<entry key="{}" value="{}"/>"#, escape(k), escape(v));
            }
            s.push_str("</metadata>\n");
        }
        s.push_str(r#"<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="context-stroke"/></marker></defs>"#);
        s.push('\n');
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
        let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (xp, yp) = (self.px(xv), self.py(yv));
            let _ = writeln!(
                s,
                r#"<line x1="{xp:.2}" y1="{b}" x2="{xp:.2}" y2="{:.0}" stroke="black"/><text x="{xp:.2}" y="{:.0}" font-size="11" text-anchor="middle">{}</text>"#,
                b + 5.0,
                b + 18.0,
                tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<line x1="{:.0}" y1="{yp:.2}" x2="{l}" y2="{yp:.2}" stroke="black"/><text x="{:.0}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
                l - 5.0,
                l - 8.0,
                yp + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="{:.0}" font-size="13" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 15.0,
            escape(xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.0}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.0})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(ylabel)
        );
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-2..1e4).contains(&v.abs()) {
        format!("{v:.2}")
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn numeric(t: &Table, col: &str) -> Result<Vec<f64>> {
    let c = t.column(col).ok_or_else(|| Error::Parse {
        line: 1,
        msg: format!("missing column `{col}`"),
    })?;
    t.rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r[c].parse::<f64>().map_err(|_| Error::Parse {
                line: i + 2,
                msg: format!("`{}` in column `{col}` is not a number", r[c]),
            })
        })
        .collect()
}

/// Silverman's rule-of-thumb bandwidth.
pub fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 1.0;
    }
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let h = 1.06 * sd * n.powf(-0.2);
    if h > 0.0 {
        h
    } else {
        1.0
    }
}

/// Gaussian kernel density estimate of `xs` at `at`.
pub fn kde(xs: &[f64], bandwidth: f64, at: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (xs.len().max(1) as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    at.iter()
        .map(|&a| xs.iter().map(|&x| (-0.5 * ((a - x) / bandwidth).powi(2)).exp()).sum::<f64>() * norm)
        .collect()
}

/// Groups rows by the values of `keys`, in first-seen order.
fn groups(t: &Table, keys: &[usize]) -> Vec<(String, Vec<usize>)> {
    let mut out: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, r) in t.rows.iter().enumerate() {
        let k: Vec<&str> = keys.iter().map(|&c| r[c].as_str()).collect();
        let k = k.join(" ");
        match out.iter_mut().find(|(g, _)| *g == k) {
            Some((_, v)) => v.push(i),
            None => out.push((k, vec![i])),
        }
    }
    out
}

/// Renders `table` as an SVG figure of the given kind. A table without
/// rows gives empty axes.
pub fn render(kind: PlotKind, table: &Table) -> Result<String> {
    let missing: Vec<&str> = kind.required().iter().copied().filter(|c| table.column(c).is_none()).collect();
    if !missing.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: format!("CSV header lacks {} for a {kind:?} plot", missing.join(", ")),
        });
    }
    match kind {
        PlotKind::Scatter => {
            let x = numeric(table, "d_so3")?;
            let y = numeric(table, "d_repr")?;
            let hi = bounds(x.iter().chain(&y).copied()).1.max(1.0);
            let mut c = Canvas::new((0.0, hi), (0.0, hi));
            for (a, b) in x.iter().zip(&y) {
                c.circle(*a, *b, PALETTE[0]);
            }
            c.polyline(&[(0.0, 0.0), (hi, hi)], "black", true);
            Ok(c.finish("d_so3", "d_repr"))
        }
        PlotKind::Density => {
            let ratio = numeric(table, "ratio")?;
            let logs: Vec<f64> = ratio.iter().map(|r| r.ln()).collect();
            let (lo, hi) = bounds(logs.iter().copied());
            let grid: Vec<f64> = if lo.is_finite() {
                (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect()
            } else {
                Vec::new()
            };
            let keys = [table.column("projection").unwrap_or(0), table.column("ratio_pair").unwrap_or(1)];
            let mut curves = Vec::new();
            let mut meta = Vec::new();
            for (name, rows) in groups(table, &keys) {
                let xs: Vec<f64> = rows.iter().map(|&i| logs[i]).filter(|v| v.is_finite()).collect();
                let h = silverman_bandwidth(&xs);
                meta.push((format!("bandwidth {name}"), format!("{h:.6e}")));
                curves.push((name, kde(&xs, h, &grid)));
            }
            let ymax = bounds(curves.iter().flat_map(|(_, d)| d.iter().copied())).1.max(0.0);
            let mut c = Canvas::new((lo, hi), (0.0, ymax * 1.05));
            c.meta = meta;
            for (i, (name, d)) in curves.iter().enumerate() {
                let color = PALETTE[i % PALETTE.len()];
                let pts: Vec<(f64, f64)> = grid.iter().copied().zip(d.iter().copied()).collect();
                c.polyline(&pts, color, false);
                c.legend(i, name, color);
            }
            Ok(c.finish("ln ratio", "density"))
        }
        PlotKind::VecField => {
            let (y1, y2) = (numeric(table, "y1")?, numeric(table, "y2")?);
            let (gx, gy) = (numeric(table, "gx")?, numeric(table, "gy")?);
            let defined = numeric(table, "defined")?;
            let (x_lo, x_hi) = bounds(y1.iter().copied());
            let (y_lo, y_hi) = bounds(y2.iter().copied());
            let n = (y1.len() as f64).sqrt().max(1.0);
            let cell = ((x_hi - x_lo).max(y_hi - y_lo) / n).max(1e-9);
            let gmax = bounds(gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b))).1;
            let scale = if gmax > 0.0 { 0.8 * cell / gmax } else { 0.0 };
            let mut c = Canvas::new((x_lo - cell, x_hi + cell), (y_lo - cell, y_hi + cell));
            for i in 0..y1.len() {
                if defined[i] != 0.0 {
                    c.arrow(y1[i], y2[i], gx[i] * scale, gy[i] * scale, PALETTE[0]);
                } else {
                    c.circle(y1[i], y2[i], PALETTE[1]);
                }
            }
            Ok(c.finish("y1", "y2"))
        }
        PlotKind::Paths => {
            let (x, y) = (numeric(table, "comp_x")?, numeric(table, "comp_y")?);
            let vcol = table.column("vector").unwrap_or(2);
            let rcol = table.column("run").unwrap_or(0);
            let (xb, yb) = (bounds(x.iter().copied()), bounds(y.iter().copied()));
            let mut c = Canvas::new(xb, yb);
            let mut names: Vec<String> = Vec::new();
            for (_, rows) in groups(table, &[rcol, vcol]) {
                let v = table.rows[rows[0]][vcol].clone();
                let k = match names.iter().position(|n| *n == v) {
                    Some(k) => k,
                    None => {
                        names.push(v.clone());
                        names.len() - 1
                    }
                };
                let pts: Vec<(f64, f64)> = rows.iter().map(|&i| (x[i], y[i])).filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
                c.polyline(&pts, PALETTE[k % PALETTE.len()], false);
            }
            for (k, n) in names.iter().enumerate() {
                c.legend(k, n, PALETTE[k % PALETTE.len()]);
            }
            Ok(c.finish("comp_x", "comp_y"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> Table {
        Table::parse(text).unwrap()
    }

    #[test]
    fn empty_csv_gives_empty_axes() {
        let svg = render(PlotKind::Scatter, &table("rep,d_so3,d_repr\n")).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("<circle"));
        assert!(svg.contains(">d_so3<") && svg.contains(">d_repr<"));
    }

    #[test]
    fn scatter_has_reference_line() {
        let svg = render(PlotKind::Scatter, &table("rep,d_so3,d_repr\nquat,0.1,1.9\nquat,1,1\n")).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn density_records_bandwidth() {
        let svg = render(
            PlotKind::Density,
            &table("projection,ratio_pair,ratio\ngso,nu1/nu2,0.5\ngso,nu1/nu2,2\nsvd_plus,m1/m2,1.1\n"),
        )
        .unwrap();
        assert!(svg.contains("<metadata>"));
        assert!(svg.contains("bandwidth gso nu1/nu2"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        assert!(matches!(
            render(PlotKind::VecField, &table("rep,d_so3,d_repr\n")),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            render(PlotKind::Scatter, &table("rep,d_so3,d_repr\nquat,x,1\n")),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn kde_integrates_to_one() {
        let xs = [0.0, 0.3, -0.2, 1.0];
        let h = silverman_bandwidth(&xs);
        let grid: Vec<f64> = (0..4001).map(|i| -10.0 + 20.0 * i as f64 / 4000.0).collect();
        let d = kde(&xs, h, &grid);
        let total: f64 = d.iter().sum::<f64>() * 20.0 / 4000.0;
        assert!((total - 1.0).abs() < 1e-6);
    }
}
