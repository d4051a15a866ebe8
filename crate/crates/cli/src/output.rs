//! CSV, JSON and SVG writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use iimhhl::refine::IterationTrace;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Files written by one command. Unless [`OutputSet::commit`] is called they
/// are removed again on drop, so a failed command leaves nothing half-written.
#[derive(Debug, Default)]
pub struct OutputSet {
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, path: &Path, contents: &[u8]) -> CliResult<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        self.written.push(path.to_path_buf());
        fs::write(path, contents).map_err(|e| CliError::io(path, e))
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.committed {
            for path in &self.written {
                let _ = fs::remove_file(path);
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub rel_error: f64,
    pub residual_norm: f64,
    pub accepted_shots: u64,
    pub total_executions: u64,
    pub cumulative_measurements: u64,
    pub f1: f64,
    pub f2: f64,
}

pub fn trace_rows(trace: &IterationTrace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            iteration: r.iteration,
            rel_error: r.rel_error.unwrap_or(f64::NAN),
            residual_norm: r.residual_norm,
            accepted_shots: r.accepted_shots,
            total_executions: r.total_executions,
            cumulative_measurements: r.cumulative_measurements,
            f1: r.f1,
            f2: r.f2,
        })
        .collect()
}

/// One line of a figure CSV. `seed` is a number or `median`.
#[derive(Debug, Clone, Serialize)]
pub struct FigureRow {
    pub figure: String,
    pub strategy: String,
    pub seed: String,
    pub iteration: usize,
    pub rel_error: f64,
    pub cumulative_measurements: u64,
}

pub const FIGURE_HEADER: [&str; 6] = [
    "figure",
    "strategy",
    "seed",
    "iteration",
    "rel_error",
    "cumulative_measurements",
];

/// Serialises rows with a header line, even when there are no rows.
pub fn csv_bytes<T: Serialize>(header: &[&str], rows: &[T]) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::io("csv buffer", e.into_error()))
}

pub fn trace_csv(trace: &IterationTrace) -> CliResult<Vec<u8>> {
    csv_bytes(
        &[
            "iteration",
            "rel_error",
            "residual_norm",
            "accepted_shots",
            "total_executions",
            "cumulative_measurements",
            "f1",
            "f2",
        ],
        &trace_rows(trace),
    )
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
    /// Horizontal dashed line, e.g. the clock resolution `2^-p`.
    pub guide: Option<(String, f64)>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Errors below this are drawn at this value so log scales stay finite.
const Y_FLOOR: f64 = 1e-17;

impl Plot {
    pub fn to_svg(&self) -> String {
        let (w, h) = (760.0, 500.0);
        let (left, right, top, bottom) = (80.0, 190.0, 40.0, 60.0);
        let pw = w - left - right;
        let ph = h - top - bottom;

        let tx = |x: f64| if self.log_x { x.max(1e-300).log10() } else { x };
        let ty = |y: f64| y.max(Y_FLOOR).log10();

        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    xs.push(tx(x));
                    ys.push(ty(y));
                }
            }
        }
        if let Some((_, g)) = &self.guide {
            ys.push(ty(*g));
        }
        let fold = |v: &[f64], init: f64, f: fn(f64, f64) -> f64| v.iter().copied().fold(init, f);
        let (mut x0, mut x1) = (fold(&xs, f64::INFINITY, f64::min), fold(&xs, f64::NEG_INFINITY, f64::max));
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if self.log_x {
            x0 = x0.floor();
            x1 = x1.ceil();
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        let mut y0 = fold(&ys, f64::INFINITY, f64::min).floor();
        let mut y1 = fold(&ys, f64::NEG_INFINITY, f64::max).ceil();
        if !y0.is_finite() {
            (y0, y1) = (-1.0, 0.0);
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            left + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );

        // y ticks at every decade
        let step = ((y1 - y0) / 10.0).ceil().max(1.0);
        let mut e = y0;
        while e <= y1 + 1e-9 {
            let y = py(e);
            let _ = writeln!(
                svg,
                r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#dddddd"/>"##,
                left + pw
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{:.2}" text-anchor="end">1e{}</text>"#,
                left - 6.0,
                y + 4.0,
                e as i64
            );
            e += step;
        }
        // x ticks
        let ticks: Vec<f64> = if self.log_x {
            (x0 as i64..=x1 as i64).map(|k| k as f64).collect()
        } else {
            let span = x1 - x0;
            let dx = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]
                .into_iter()
                .find(|d| span / d <= 10.0)
                .unwrap_or(span / 10.0);
            let mut v = Vec::new();
            let mut t = (x0 / dx).ceil() * dx;
            while t <= x1 + 1e-9 {
                v.push(t);
                t += dx;
            }
            v
        };
        for t in ticks {
            let x = px(t);
            let label = if self.log_x { format!("1e{}", t as i64) } else { format!("{t}") };
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
                top + ph,
                top + ph + 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#,
                top + ph + 20.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            left + pw / 2.0,
            h - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
            top + ph / 2.0,
            top + ph / 2.0,
            escape(&self.y_label)
        );

        if let Some((name, g)) = &self.guide {
            let y = py(ty(*g));
            let _ = writeln!(
                svg,
                r#"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="black" stroke-dasharray="6,4"><title>{}</title></line>"#,
                left + pw,
                escape(name)
            );
        }

        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", px(tx(x)), py(ty(y))))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#,
                escape(&s.name),
                pts.join(" ")
            );
            for p in &pts {
                let (cx, cy) = p.split_once(',').expect("formatted pair");
                let _ = writeln!(svg, r#"<circle cx="{cx}" cy="{cy}" r="2.2" fill="{color}"/>"#);
            }
        }

        // legend
        let lx = left + pw + 15.0;
        let mut ly = top + 10.0;
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                lx + 22.0
            );
            let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, escape(&s.name));
            ly += 18.0;
        }
        if let Some((name, _)) = &self.guide {
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="black" stroke-dasharray="6,4"/>"#,
                lx + 22.0
            );
            let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, escape(name));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_csv() {
        let rows: Vec<FigureRow> = Vec::new();
        let bytes = csv_bytes(&FIGURE_HEADER, &rows).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "figure,strategy,seed,iteration,rel_error,cumulative_measurements\n"
        );
    }

    #[test]
    fn svg_names_every_series() {
        let plot = Plot {
            title: "a < b".into(),
            x_label: "iteration".into(),
            y_label: "relative error".into(),
            log_x: false,
            series: vec![
                Series {
                    name: "none".into(),
                    points: vec![(1.0, 0.1), (2.0, 0.01)],
                },
                Series {
                    name: "abs-ratio".into(),
                    points: vec![(1.0, 0.1), (2.0, 0.0)],
                },
            ],
            guide: Some(("resolution 2^-4".into(), 0.0625)),
        };
        let svg = plot.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains(r#"data-series="none""#));
        assert!(svg.contains(r#"data-series="abs-ratio""#));
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn uncommitted_outputs_are_removed() {
        let dir = std::env::temp_dir().join(format!("iimhhl-output-{}", std::process::id()));
        let path = dir.join("a.txt");
        {
            let mut out = OutputSet::new();
            out.write(&path, b"x").unwrap();
            assert!(path.exists());
        }
        assert!(!path.exists());
        let mut out = OutputSet::new();
        out.write(&path, b"x").unwrap();
        out.commit();
        assert!(path.exists());
        let _ = fs::remove_dir_all(&dir);
    }
}
