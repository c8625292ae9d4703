//! Tables and plots written to disk.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bounds::{bounds_table, range_label, BoundsRow};
use crate::harness::sweep::SweepReport;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            _ => Err(Error::InvalidConfig(format!("unknown table format `{s}` (csv or markdown)"))),
        }
    }
}

const TABLE_COLUMNS: [&str; 7] = ["n", "k1", "k2", "L", "lo", "hi", "range"];

/// Rows `(n, k1, k2, L, lo, hi)` with reals to 6 decimals. Markdown adds
/// a `range` column with the printable bracket.
pub fn format_bounds_table(rows: &[BoundsRow], format: TableFormat) -> String {
    let cells = |r: &BoundsRow| {
        [
            r.n.to_string(),
            format!("{:.6}", r.k1),
            format!("{:.6}", r.k2),
            format!("{:.6}", r.upper),
            r.lo.to_string(),
            r.hi.to_string(),
            r.range_label(),
        ]
    };
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            // the range label holds a comma, and lo/hi already carry it
            let _ = writeln!(out, "{}", TABLE_COLUMNS[..6].join(","));
            for r in rows {
                let _ = writeln!(out, "{}", cells(r)[..6].join(","));
            }
        }
        TableFormat::Markdown => {
            let _ = writeln!(out, "| {} |", TABLE_COLUMNS.join(" | "));
            let _ = writeln!(out, "|{}", "---:|".repeat(TABLE_COLUMNS.len()));
            for r in rows {
                let _ = writeln!(out, "| {} |", cells(r).join(" | "));
            }
        }
    }
    out
}

/// Table text for sample size `r` and attribute counts `n_from..=n_to`.
pub fn bounds_table_text(r: u64, n_from: usize, n_to: usize, format: TableFormat) -> Result<String> {
    Ok(format_bounds_table(&bounds_table(r, n_from, n_to)?, format))
}

pub fn emit_bounds_table(r: u64, n_from: usize, n_to: usize, format: TableFormat, path: &Path) -> Result<()> {
    let text = bounds_table_text(r, n_from, n_to, format)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Read either table format back.
pub fn parse_bounds_table(text: &str) -> Result<Vec<BoundsRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("|-") || line.starts_with("|--") {
            continue;
        }
        let cells: Vec<&str> = if line.starts_with('|') {
            line.trim_matches('|').split('|').map(str::trim).collect()
        } else {
            line.split(',').map(str::trim).collect()
        };
        if cells.first() == Some(&"n") {
            continue;
        }
        let bad = |column: usize| Error::Parse {
            source_name: "bounds table".into(),
            line: i + 1,
            column,
            message: format!("cannot parse `{}`", cells.get(column - 1).unwrap_or(&"")),
        };
        if cells.len() != 6 && cells.len() != 7 {
            return Err(bad(cells.len()));
        }
        let row = BoundsRow {
            n: cells[0].parse().map_err(|_| bad(1))?,
            k1: cells[1].parse().map_err(|_| bad(2))?,
            k2: cells[2].parse().map_err(|_| bad(3))?,
            upper: cells[3].parse().map_err(|_| bad(4))?,
            lo: cells[4].parse().map_err(|_| bad(5))?,
            hi: cells[5].parse().map_err(|_| bad(6))?,
        };
        if cells.len() == 7 && range_label(row.lo, row.hi) != cells[6] {
            return Err(bad(7));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Where [`emit_sweep_plot`] writes the plotted values.
pub fn plot_sidecar_path(svg: &Path) -> PathBuf {
    let stem = svg.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    svg.with_file_name(format!("{stem}_values.csv"))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Bar chart with one group per report row: final validation MSE and
/// dissimilarity side by side, each scaled to its own axis.
pub fn sweep_plot_svg(report: &SweepReport) -> Result<String> {
    if report.rows.is_empty() {
        return Err(Error::EmptyData);
    }
    const W_GROUP: f64 = 48.0;
    const BAR: f64 = 16.0;
    const LEFT: f64 = 70.0;
    const TOP: f64 = 50.0;
    const PLOT_H: f64 = 260.0;
    let plot_w = W_GROUP * report.rows.len() as f64;
    let width = LEFT * 2.0 + plot_w;
    let height = TOP + PLOT_H + 70.0;

    let finite_max = |f: &dyn Fn(&crate::harness::sweep::SweepRow) -> f64| {
        let m = report.rows.iter().map(f).filter(|v| v.is_finite()).fold(0.0f64, f64::max);
        if m > 0.0 {
            m
        } else {
            1.0
        }
    };
    let mse_max = finite_max(&|r| r.final_val_mse);
    let dis_max = finite_max(&|r| r.dissimilarity);
    let multi_seed = report.rows.iter().any(|r| r.seed != report.rows[0].seed);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}: validation MSE and dissimilarity by width</text>"#,
        width / 2.0,
        escape(&report.dataset)
    );
    let base = TOP + PLOT_H;
    let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="#333"/>"##, LEFT + plot_w);
    let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base}" stroke="#333"/>"##);
    let right = LEFT + plot_w;
    let _ = writeln!(s, r##"<line x1="{right}" y1="{TOP}" x2="{right}" y2="{base}" stroke="#333"/>"##);
    for tick in 0..=4 {
        let frac = tick as f64 / 4.0;
        let y = base - frac * PLOT_H;
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{:.4}</text>"#, LEFT - 4.0, mse_max * frac);
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{:.4}</text>"#, right + 4.0, dis_max * frac);
    }

    for (i, row) in report.rows.iter().enumerate() {
        let x0 = LEFT + i as f64 * W_GROUP + (W_GROUP - 2.0 * BAR) / 2.0;
        for (j, (class, value, max, color)) in [
            ("mse", row.final_val_mse, mse_max, "#3b6ea5"),
            ("dissimilarity", row.dissimilarity, dis_max, "#d9822b"),
        ]
        .into_iter()
        .enumerate()
        {
            let h = if value.is_finite() { (value / max).clamp(0.0, 1.0) * PLOT_H } else { 0.0 };
            let _ = writeln!(
                s,
                r#"<rect class="bar {class}" x="{}" y="{}" width="{BAR}" height="{h}" fill="{color}"><title>{value}</title></rect>"#,
                x0 + j as f64 * BAR,
                base - h
            );
        }
        let label = if multi_seed { format!("{}/s{}", row.width, row.seed) } else { row.width.to_string() };
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{label}</text>"#, x0 + BAR, base + 14.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">hidden width</text>"#,
        LEFT + plot_w / 2.0,
        base + 32.0
    );
    let ly = base + 52.0;
    let _ = writeln!(
        s,
        r##"<g class="legend"><rect x="{LEFT}" y="{}" width="10" height="10" fill="#3b6ea5"/><text x="{}" y="{ly}">final validation MSE (left axis)</text><rect x="{}" y="{}" width="10" height="10" fill="#d9822b"/><text x="{}" y="{ly}">dissimilarity (right axis)</text></g>"##,
        ly - 9.0,
        LEFT + 14.0,
        LEFT + 220.0,
        ly - 9.0,
        LEFT + 234.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Write the chart to `path` and the report rows to the sidecar CSV.
/// Returns the sidecar path.
pub fn emit_sweep_plot(report: &SweepReport, path: &Path) -> Result<PathBuf> {
    let svg = sweep_plot_svg(report)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))?;
    let sidecar = plot_sidecar_path(path);
    report.save_csv(&sidecar)?;
    Ok(sidecar)
}
