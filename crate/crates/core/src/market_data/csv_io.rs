//! CSV readers and writers for returns, risk-free and factor files.
//!
//! Every file starts with a `date` column holding `YYYY-MM` months. Returns
//! files may leave cells empty to mark them missing; risk-free and factor
//! files must be complete and gap-free.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::month::Month;
use super::panel::{FactorSeries, ReturnsPanel, RiskFreeSeries};
use crate::error::{Error, Result};

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn header(path: &Path, rdr: &mut csv::Reader<File>) -> Result<Vec<String>> {
    let h = rdr
        .headers()
        .map_err(|e| Error::parse(path, format!("malformed header: {e}")))?;
    let cols: Vec<String> = h.iter().map(str::to_string).collect();
    if cols.first().map(String::as_str) != Some("date") {
        return Err(Error::parse(
            path,
            "malformed header: first column must be `date`",
        ));
    }
    if let Some(empty) = cols.iter().position(String::is_empty) {
        return Err(Error::parse(
            path,
            format!("malformed header: column {} has no name", empty + 1),
        ));
    }
    Ok(cols)
}

/// Parsed rows: (line number, month, raw cells after the date).
fn rows(path: &Path, rdr: &mut csv::Reader<File>) -> Result<Vec<(u64, Month, Vec<String>)>> {
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let date: Month = rec[0]
            .parse()
            .map_err(|e: Error| Error::parse(path, format!("row {line}: {e}")))?;
        out.push((line, date, rec.iter().skip(1).map(str::to_string).collect()));
    }
    Ok(out)
}

fn check_dates(path: &Path, rows: &[(u64, Month, Vec<String>)]) -> Result<()> {
    for pair in rows.windows(2) {
        let (a, b) = (pair[0].1, pair[1].1);
        let line = pair[1].0;
        if b == a {
            return Err(Error::parse(
                path,
                format!("row {line}: duplicate date {b}"),
            ));
        }
        if b < a {
            return Err(Error::parse(
                path,
                format!("row {line}: date {b} is out of order"),
            ));
        }
        if b != a.next() {
            return Err(Error::parse(
                path,
                format!("row {line}: date gap between {a} and {b}"),
            ));
        }
    }
    Ok(())
}

fn parse_cell(path: &Path, line: u64, date: Month, column: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw.parse().map_err(|_| {
        Error::parse(
            path,
            format!("row {line} ({date}), column {column}: cannot parse {raw:?} as a number"),
        )
    })?;
    if !v.is_finite() {
        return Err(Error::parse(
            path,
            format!("row {line} ({date}), column {column}: non-finite value {raw:?}"),
        ));
    }
    Ok(v)
}

/// Reads a `date,<asset>,...` file. Empty cells become missing values.
pub fn load_returns_csv(path: impl AsRef<Path>) -> Result<ReturnsPanel> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let cols = header(path, &mut rdr)?;
    let assets: Vec<String> = cols[1..].to_vec();
    if assets.is_empty() {
        return Err(Error::parse(path, "malformed header: no asset columns"));
    }
    for (i, a) in assets.iter().enumerate() {
        if assets[..i].contains(a) {
            return Err(Error::parse(path, format!("duplicate asset id {a:?}")));
        }
    }
    let rows = rows(path, &mut rdr)?;
    check_dates(path, &rows)?;

    let mut dates = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for (line, date, cells) in rows {
        let mut row = Vec::with_capacity(assets.len());
        for (asset, raw) in assets.iter().zip(&cells) {
            if raw.is_empty() {
                row.push(None);
                continue;
            }
            let v = parse_cell(path, line, date, asset, raw)?;
            if v <= -1.0 {
                return Err(Error::parse(
                    path,
                    format!("row {line} ({date}), column {asset}: return {v} is -100% or worse"),
                ));
            }
            row.push(Some(v));
        }
        dates.push(date);
        values.push(row);
    }
    ReturnsPanel::new(dates, assets, values)
}

/// Writes a panel in the same layout [`load_returns_csv`] reads.
pub fn write_returns_csv(panel: &ReturnsPanel, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    out.push_str("date");
    for a in panel.assets() {
        out.push(',');
        out.push_str(a);
    }
    out.push('\n');
    for (t, date) in panel.dates().iter().enumerate() {
        out.push_str(&date.to_string());
        for v in panel.row(t) {
            out.push(',');
            if let Some(v) = v {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    write_file(path.as_ref(), &out)
}

/// Reads a `date,rf` file.
pub fn load_riskfree_csv(path: impl AsRef<Path>) -> Result<RiskFreeSeries> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let cols = header(path, &mut rdr)?;
    if cols.len() != 2 || cols[1] != "rf" {
        return Err(Error::parse(path, "malformed header: expected `date,rf`"));
    }
    let rows = rows(path, &mut rdr)?;
    check_dates(path, &rows)?;
    let mut dates = Vec::with_capacity(rows.len());
    let mut rf = Vec::with_capacity(rows.len());
    for (line, date, cells) in rows {
        rf.push(parse_cell(path, line, date, "rf", &cells[0])?);
        dates.push(date);
    }
    RiskFreeSeries::new(dates, rf)
}

pub fn write_riskfree_csv(rf: &RiskFreeSeries, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("date,rf\n");
    for (d, v) in rf.dates().iter().zip(rf.values()) {
        out.push_str(&format!("{d},{v}\n"));
    }
    write_file(path.as_ref(), &out)
}

/// Reads a `date,mkt_rf[,smb,hml,rmw,cma,mom]` file.
pub fn load_factors_csv(path: impl AsRef<Path>) -> Result<FactorSeries> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    let cols = header(path, &mut rdr)?;
    let names: Vec<String> = cols[1..].to_vec();
    if !names.iter().any(|n| n == "mkt_rf") {
        return Err(Error::parse(path, "missing mandatory column mkt_rf"));
    }
    let rows = rows(path, &mut rdr)?;
    check_dates(path, &rows)?;
    let mut dates = Vec::with_capacity(rows.len());
    let mut columns = vec![Vec::with_capacity(rows.len()); names.len()];
    for (line, date, cells) in rows {
        for ((name, raw), col) in names.iter().zip(&cells).zip(columns.iter_mut()) {
            col.push(parse_cell(path, line, date, name, raw)?);
        }
        dates.push(date);
    }
    FactorSeries::new(dates, names, columns).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn write_factors_csv(factors: &FactorSeries, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("date");
    for n in factors.names() {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    let cols: Vec<&[f64]> = factors
        .names()
        .iter()
        .map(|n| factors.column(n).expect("listed name"))
        .collect();
    for (t, d) in factors.dates().iter().enumerate() {
        out.push_str(&d.to_string());
        for c in &cols {
            out.push_str(&format!(",{}", c[t]));
        }
        out.push('\n');
    }
    write_file(path.as_ref(), &out)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))
}
