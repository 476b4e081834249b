//! Metric tables and figures.

mod svg;

pub use svg::{
    render_dendrogram_svg, render_heatmap_svg, HeatmapOrder, NEGATIVE_COLOR, NEUTRAL_COLOR,
    POSITIVE_COLOR,
};

use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::backtest::BacktestReport;
use crate::error::Error;
use crate::metrics::{summarize, MetricsRow};

/// Fixed CSV header for metric exports.
pub const CSV_HEADER: &str = "method,subset,mean_excess,std_dev,sharpe,avg_turnover,n_months";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Table,
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "table" => Ok(TableFormat::Table),
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(Error::InvalidArgument(format!(
                "unknown format {other:?}; expected table, csv or json"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TableOptions {
    /// Bold header via ANSI escapes (table format only).
    pub styled: bool,
    /// Append rows for the market benchmark.
    pub include_market: bool,
}

/// One row of the metrics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    pub subset: String,
    pub mean_excess: f64,
    pub std_dev: f64,
    pub sharpe: Option<f64>,
    pub avg_turnover: Option<f64>,
    pub n_months: usize,
}

impl TableRow {
    fn new(method: &str, subset: &str, m: &MetricsRow) -> Self {
        Self {
            method: method.to_string(),
            subset: subset.to_string(),
            mean_excess: m.mean_excess,
            std_dev: m.std_dev,
            sharpe: m.sharpe,
            avg_turnover: m.avg_turnover,
            n_months: m.n_months,
        }
    }
}

/// Rows in report order: per method, `all` then `downturn`. Undefined subsets are skipped.
pub fn table_rows(report: &BacktestReport, include_market: bool) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for (method, s) in &report.strategies {
        if let Some(m) = &s.metrics.all {
            rows.push(TableRow::new(method, "all", m));
        }
        if let Some(m) = &s.metrics.downturn {
            rows.push(TableRow::new(method, "downturn", m));
        }
    }
    if include_market {
        let excess = &report.market.excess;
        if !report.config.downturns_only {
            if let Ok(m) = summarize(excess) {
                rows.push(TableRow::new("market", "all", &m));
            }
        }
        let down: Vec<f64> = excess
            .iter()
            .copied()
            .filter(|&x| x < report.config.downturn_threshold)
            .collect();
        if let Ok(m) = summarize(&down) {
            rows.push(TableRow::new("market", "downturn", &m));
        }
    }
    rows
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_table(report: &BacktestReport, format: TableFormat, opts: TableOptions) -> String {
    let rows = table_rows(report, opts.include_market);
    match format {
        TableFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("rows are serialisable");
            s.push('\n');
            s
        }
        TableFormat::Csv => {
            let mut s = format!("{CSV_HEADER}\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.method,
                    r.subset,
                    r.mean_excess,
                    r.std_dev,
                    opt(r.sharpe),
                    opt(r.avg_turnover),
                    r.n_months
                );
            }
            s
        }
        TableFormat::Table => fixed_width(&rows, opts.styled),
    }
}

fn fixed_width(rows: &[TableRow], styled: bool) -> String {
    let header = [
        "method",
        "subset",
        "mean excess %",
        "std dev %",
        "sharpe",
        "turnover",
        "months",
    ];
    let body: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.method.clone(),
                r.subset.clone(),
                format!("{:.2}", 100.0 * r.mean_excess),
                format!("{:.2}", 100.0 * r.std_dev),
                r.sharpe.map_or("n/a".into(), |s| format!("{s:.3}")),
                r.avg_turnover.map_or("n/a".into(), |t| format!("{t:.3}")),
                r.n_months.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                if i < 2 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let head = line(&header.map(String::from));
    let mut out = String::new();
    if styled {
        let _ = writeln!(out, "\x1b[1m{head}\x1b[0m");
    } else {
        let _ = writeln!(out, "{head}");
    }
    let _ = writeln!(out, "{}", "-".repeat(head.chars().count()));
    for row in &body {
        let _ = writeln!(out, "{}", line(row));
    }
    out
}
