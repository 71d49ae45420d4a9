//! Three-panel SVG rendering of an aggregate table: benchmarks, then the
//! coefficient battery under raw and percentile latent scores.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::commands::AGGREGATE_COLUMNS;
use crate::error::{CliError, CliResult};

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 300.0;
const PLOT_LEFT: f64 = 60.0;
const PLOT_RIGHT: f64 = 700.0;
const PLOT_TOP: f64 = 35.0;
const PLOT_BOTTOM: f64 = 260.0;

const PALETTE: [&str; 9] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#17becf",
];

const COEFFICIENTS: [&str; 9] = [
    "R2_measure",
    "R2_predict",
    "Corr2",
    "Sigma",
    "T_measure",
    "T_predict",
    "MI",
    "W_measure",
    "W_predict",
];

/// Mean per `(condition, metric)`, keyed by test length.
#[derive(Debug, Default)]
pub struct Series {
    means: BTreeMap<(String, String), BTreeMap<usize, f64>>,
}

impl Series {
    pub fn parse_csv(text: &str, source: &str) -> CliResult<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r
            .headers()
            .map_err(|e| CliError::Config(format!("{source}: {e}")))?
            .clone();
        let find = |name: &str| headers.iter().position(|h| h.trim() == name);
        let missing: Vec<&str> = ["m", "condition", "metric", "mean"]
            .into_iter()
            .filter(|c| find(c).is_none())
            .collect();
        if !missing.is_empty() {
            return Err(CliError::Config(format!(
                "{source}: missing aggregate columns: {} (expected {})",
                missing.join(", "),
                AGGREGATE_COLUMNS.join(",")
            )));
        }
        let (im, ic, imet, imean) = (
            find("m").unwrap(),
            find("condition").unwrap(),
            find("metric").unwrap(),
            find("mean").unwrap(),
        );
        let mut series = Series::default();
        for (line, record) in r.records().enumerate() {
            let bad = |what: &str| CliError::Config(format!("{source}: row {}: {what}", line + 2));
            let record = record.map_err(|e| bad(&e.to_string()))?;
            let m: usize = record[im]
                .trim()
                .parse()
                .map_err(|_| bad("m is not an integer"))?;
            let mean: f64 = record[imean]
                .trim()
                .parse()
                .map_err(|_| bad("mean is not a number"))?;
            series
                .means
                .entry((
                    record[ic].trim().to_string(),
                    record[imet].trim().to_string(),
                ))
                .or_default()
                .insert(m, mean);
        }
        Ok(series)
    }

    fn get(&self, condition: &str, metric: &str) -> Option<&BTreeMap<usize, f64>> {
        self.means.get(&(condition.to_string(), metric.to_string()))
    }

    fn m_range(&self) -> (usize, usize) {
        let ms = self.means.values().flat_map(|s| s.keys().copied());
        let (lo, hi) = ms.fold((usize::MAX, 0), |(lo, hi), m| (lo.min(m), hi.max(m)));
        if lo > hi {
            (0, 1)
        } else {
            (lo, hi)
        }
    }
}

pub fn render_file(aggregate: &Path, svg: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(aggregate).map_err(|e| CliError::io(aggregate, e))?;
    let series = Series::parse_csv(&text, &aggregate.display().to_string())?;
    std::fs::write(svg, render(&series)).map_err(|e| CliError::io(svg, e))
}

struct Panel<'a> {
    title: &'a str,
    lines: Vec<(&'a str, Option<&'a BTreeMap<usize, f64>>)>,
}

pub fn render(series: &Series) -> String {
    // benchmarks do not depend on the latent transform; prefer the raw rows
    let has_raw = ["RRMSE", "RAE"]
        .iter()
        .any(|m| series.get("raw", m).is_some());
    let bench_condition = if has_raw { "raw" } else { "percentile" };
    let panels = [
        Panel {
            title: "A. EAP benchmarks",
            lines: ["RRMSE", "RAE"]
                .map(|m| (m, series.get(bench_condition, m)))
                .to_vec(),
        },
        Panel {
            title: "B. Coefficients, raw latent scores",
            lines: COEFFICIENTS.map(|c| (c, series.get("raw", c))).to_vec(),
        },
        Panel {
            title: "C. Coefficients, percentile latent scores",
            lines: COEFFICIENTS
                .map(|c| (c, series.get("percentile", c)))
                .to_vec(),
        },
    ];
    let (m_lo, m_hi) = series.m_range();
    let x_of = |m: usize| {
        if m_hi == m_lo {
            (PLOT_LEFT + PLOT_RIGHT) / 2.0
        } else {
            PLOT_LEFT + (PLOT_RIGHT - PLOT_LEFT) * (m - m_lo) as f64 / (m_hi - m_lo) as f64
        }
    };
    let ms: Vec<usize> = {
        let mut v: Vec<usize> = series
            .means
            .values()
            .flat_map(|s| s.keys().copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {}" width="{WIDTH}" height="{}" font-family="sans-serif" font-size="11">"#,
        3.0 * PANEL_HEIGHT,
        3.0 * PANEL_HEIGHT
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, panel) in panels.iter().enumerate() {
        let top = p as f64 * PANEL_HEIGHT;
        let y_of = |v: f64| top + PLOT_BOTTOM - (PLOT_BOTTOM - PLOT_TOP) * v.clamp(-0.05, 1.05);
        let _ = writeln!(out, r#"<g class="panel" id="panel-{}">"#, p + 1);
        let _ = writeln!(
            out,
            r#"<text x="{PLOT_LEFT}" y="{:.2}" font-size="13" font-weight="bold">{}</text>"#,
            top + 20.0,
            panel.title
        );
        // axes, ticks and gridlines
        let _ = writeln!(
            out,
            r#"<path d="M{PLOT_LEFT} {:.2} V{:.2} H{PLOT_RIGHT}" fill="none" stroke="black"/>"#,
            top + PLOT_TOP,
            top + PLOT_BOTTOM
        );
        for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let y = y_of(tick);
            let _ = writeln!(
                out,
                r##"<line x1="{PLOT_LEFT}" y1="{y:.2}" x2="{PLOT_RIGHT}" y2="{y:.2}" stroke="#dddddd"/>"##
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{tick:.2}</text>"#,
                PLOT_LEFT - 6.0,
                y + 4.0
            );
        }
        for &m in &ms {
            let x = x_of(m);
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{m}</text>"#,
                top + PLOT_BOTTOM + 15.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">test length m</text>"#,
            (PLOT_LEFT + PLOT_RIGHT) / 2.0,
            top + PLOT_BOTTOM + 32.0
        );
        for (i, (name, values)) in panel.lines.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let legend_y = top + PLOT_TOP + 8.0 + 18.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<rect x="715" y="{:.2}" width="14" height="4" fill="{colour}"/>"#,
                legend_y - 4.0
            );
            let _ = writeln!(
                out,
                r#"<text x="735" y="{:.2}">{name}</text>"#,
                legend_y + 1.0
            );
            let Some(values) = values else { continue };
            if values.len() == 1 {
                for (&m, &v) in values.iter() {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{colour}"><title>{name}</title></circle>"#,
                        x_of(m),
                        y_of(v)
                    );
                }
            } else {
                let points: Vec<String> = values
                    .iter()
                    .map(|(&m, &v)| format!("{:.2},{:.2}", x_of(m), y_of(v)))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"><title>{name}</title></polyline>"#,
                    points.join(" ")
                );
            }
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}
