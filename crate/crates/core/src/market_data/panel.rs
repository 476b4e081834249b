use std::collections::HashSet;

use nalgebra::DMatrix;

use super::month::{check_contiguous, Month};
use crate::error::{Error, Result};

/// Monthly simple returns for a named universe. Cells may be missing.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsPanel {
    dates: Vec<Month>,
    assets: Vec<String>,
    /// Row-major, `dates.len() * assets.len()`.
    values: Vec<Option<f64>>,
}

impl ReturnsPanel {
    /// Builds a panel from rows of cells, validating every invariant.
    ///
    /// Dates must be consecutive months, asset ids unique, and every present
    /// value finite and strictly greater than -1.
    pub fn new(
        dates: Vec<Month>,
        assets: Vec<String>,
        rows: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        check_contiguous(&dates).map_err(Error::Data)?;
        let mut seen = HashSet::new();
        for a in &assets {
            if !seen.insert(a.as_str()) {
                return Err(Error::Data(format!("duplicate asset id {a:?}")));
            }
        }
        if rows.len() != dates.len() {
            return Err(Error::Data(format!(
                "{} rows for {} dates",
                rows.len(),
                dates.len()
            )));
        }
        let mut values = Vec::with_capacity(dates.len() * assets.len());
        for (date, row) in dates.iter().zip(rows) {
            if row.len() != assets.len() {
                return Err(Error::Data(format!(
                    "row {date} has {} cells for {} assets",
                    row.len(),
                    assets.len()
                )));
            }
            for (asset, cell) in assets.iter().zip(&row) {
                if let Some(v) = cell {
                    check_return(*v).map_err(|m| Error::Data(format!("{date}, {asset}: {m}")))?;
                }
            }
            values.extend(row);
        }
        Ok(Self {
            dates,
            assets,
            values,
        })
    }

    pub fn dates(&self) -> &[Month] {
        &self.dates
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn n_months(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.assets.len() + col]
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        let n = self.assets.len();
        &self.values[row * n..(row + 1) * n]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        (0..self.dates.len()).map(move |t| self.get(t, col))
    }

    pub fn n_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn position(&self, date: Month) -> Option<usize> {
        let first = *self.dates.first()?;
        let idx = date.ordinal() - first.ordinal();
        (idx >= 0 && (idx as usize) < self.dates.len()).then_some(idx as usize)
    }

    pub fn asset_index(&self, asset: &str) -> Option<usize> {
        self.assets.iter().position(|a| a == asset)
    }

    /// T×N matrix of the panel. Fails if any cell is missing.
    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        let (t, n) = (self.n_months(), self.n_assets());
        let mut out = DMatrix::zeros(t, n);
        for r in 0..t {
            for c in 0..n {
                out[(r, c)] = self.get(r, c).ok_or_else(|| {
                    Error::Data(format!(
                        "missing value at {}, {}",
                        self.dates[r], self.assets[c]
                    ))
                })?;
            }
        }
        Ok(out)
    }

    /// Sub-panel over `rows` (a contiguous range) and the listed columns, in that order.
    pub fn select(&self, rows: std::ops::Range<usize>, cols: &[usize]) -> Self {
        let dates = self.dates[rows.clone()].to_vec();
        let assets = cols.iter().map(|&c| self.assets[c].clone()).collect();
        let mut values = Vec::with_capacity(dates.len() * cols.len());
        for r in rows {
            values.extend(cols.iter().map(|&c| self.get(r, c)));
        }
        Self {
            dates,
            assets,
            values,
        }
    }

    pub(crate) fn map_present(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        let n = self.assets.len().max(1);
        let mut values = Vec::with_capacity(self.values.len());
        for (i, v) in self.values.iter().enumerate() {
            let mapped = v.map(|x| f(i / n, x));
            if let Some(x) = mapped {
                check_return(x).map_err(|m| {
                    Error::Data(format!(
                        "{}, {}: {m}",
                        self.dates[i / n],
                        self.assets[i % n]
                    ))
                })?;
            }
            values.push(mapped);
        }
        Ok(Self {
            dates: self.dates.clone(),
            assets: self.assets.clone(),
            values,
        })
    }
}

fn check_return(v: f64) -> std::result::Result<(), String> {
    if !v.is_finite() {
        Err(format!("non-finite return {v}"))
    } else if v <= -1.0 {
        Err(format!("return {v} is -100% or worse"))
    } else {
        Ok(())
    }
}

/// Monthly risk-free rate over a gap-free span.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskFreeSeries {
    dates: Vec<Month>,
    rf: Vec<f64>,
}

impl RiskFreeSeries {
    pub fn new(dates: Vec<Month>, rf: Vec<f64>) -> Result<Self> {
        check_contiguous(&dates).map_err(Error::Data)?;
        if dates.len() != rf.len() {
            return Err(Error::Data(
                "risk-free dates and values differ in length".into(),
            ));
        }
        if let Some(v) = rf.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite risk-free rate {v}")));
        }
        Ok(Self { dates, rf })
    }

    pub fn dates(&self) -> &[Month] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.rf
    }

    pub fn rate(&self, date: Month) -> Option<f64> {
        let first = *self.dates.first()?;
        let idx = date.ordinal() - first.ordinal();
        (idx >= 0)
            .then(|| self.rf.get(idx as usize).copied())
            .flatten()
    }
}

/// Names accepted as factor columns, in canonical order.
pub const FACTOR_NAMES: [&str; 6] = ["mkt_rf", "smb", "hml", "rmw", "cma", "mom"];

/// Monthly factor returns; `mkt_rf` is always present.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSeries {
    dates: Vec<Month>,
    names: Vec<String>,
    /// One vector per name, each `dates.len()` long.
    columns: Vec<Vec<f64>>,
}

impl FactorSeries {
    pub fn new(dates: Vec<Month>, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        check_contiguous(&dates).map_err(Error::Data)?;
        if names.len() != columns.len() {
            return Err(Error::Data(
                "factor names and columns differ in length".into(),
            ));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !FACTOR_NAMES.contains(&name.as_str()) {
                return Err(Error::Data(format!(
                    "unknown factor column {name:?}; expected one of {}",
                    FACTOR_NAMES.join(",")
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Data(format!("duplicate factor column {name:?}")));
            }
        }
        if !seen.contains("mkt_rf") {
            return Err(Error::Data(
                "factor series lacks the mandatory mkt_rf column".into(),
            ));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != dates.len() {
                return Err(Error::Data(format!("factor {name} has wrong length")));
            }
            if let Some(v) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "factor {name} has non-finite value {v}"
                )));
            }
        }
        Ok(Self {
            dates,
            names,
            columns,
        })
    }

    pub fn dates(&self) -> &[Month] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn mkt_rf(&self) -> &[f64] {
        self.column("mkt_rf").expect("mkt_rf is mandatory")
    }

    pub fn value(&self, name: &str, date: Month) -> Option<f64> {
        let first = *self.dates.first()?;
        let idx = date.ordinal() - first.ordinal();
        if idx < 0 {
            return None;
        }
        self.column(name)?.get(idx as usize).copied()
    }
}

/// Where an allocation happens and how much history/future it consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub as_of: Month,
    pub lookback_months: usize,
    pub hold_months: usize,
}

/// Subtracts the same-month risk-free rate from every present cell.
pub fn excess_returns(panel: &ReturnsPanel, rf: &RiskFreeSeries) -> Result<ReturnsPanel> {
    let rates = panel
        .dates()
        .iter()
        .map(|&d| {
            rf.rate(d)
                .ok_or_else(|| Error::Data(format!("risk-free series does not cover {d}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    panel.map_present(|row, r| r - rates[row])
}

/// Splits `panel` into the look-back and holding windows around `spec.as_of`.
///
/// Assets with any missing cell in either window are dropped from both, so
/// the two outputs share one universe in the original column order.
pub fn window(panel: &ReturnsPanel, spec: &WindowSpec) -> Result<(ReturnsPanel, ReturnsPanel)> {
    if spec.lookback_months == 0 || spec.hold_months == 0 {
        return Err(Error::InvalidArgument(
            "look-back and holding lengths must be positive".into(),
        ));
    }
    let as_of = window_start(panel, spec.as_of, spec.lookback_months)?;
    let hold_end = as_of + spec.hold_months;
    if hold_end > panel.n_months() {
        return Err(Error::WindowOutOfRange(format!(
            "holding window {}..{} runs past the panel end {}",
            spec.as_of,
            spec.as_of.offset(spec.hold_months as i64 - 1),
            panel.dates().last().expect("non-empty")
        )));
    }
    let lb_rows = as_of - spec.lookback_months..as_of;
    let hold_rows = as_of..hold_end;
    let keep = complete_columns(panel, lb_rows.start..hold_end);
    if keep.len() < 2 {
        return Err(Error::TooFewAssets {
            as_of: spec.as_of.to_string(),
            surviving: keep.len(),
        });
    }
    Ok((panel.select(lb_rows, &keep), panel.select(hold_rows, &keep)))
}

/// Look-back window only, for allocating at a date whose future is not in the
/// panel. `as_of` may be the month right after the panel's last row.
pub fn lookback_window(
    panel: &ReturnsPanel,
    as_of: Month,
    lookback_months: usize,
) -> Result<ReturnsPanel> {
    if lookback_months == 0 {
        return Err(Error::InvalidArgument(
            "look-back length must be positive".into(),
        ));
    }
    let idx = window_start(panel, as_of, lookback_months)?;
    let rows = idx - lookback_months..idx;
    let keep = complete_columns(panel, rows.clone());
    if keep.len() < 2 {
        return Err(Error::TooFewAssets {
            as_of: as_of.to_string(),
            surviving: keep.len(),
        });
    }
    Ok(panel.select(rows, &keep))
}

/// Row index of `as_of` (possibly one past the end) after checking the look-back fits.
fn window_start(panel: &ReturnsPanel, as_of: Month, lookback: usize) -> Result<usize> {
    let first = *panel
        .dates()
        .first()
        .ok_or_else(|| Error::WindowOutOfRange("empty panel".into()))?;
    let idx = as_of.ordinal() - first.ordinal();
    if idx < lookback as i64 {
        return Err(Error::WindowOutOfRange(format!(
            "{lookback}-month look-back before {as_of} starts before the panel begins at {first}"
        )));
    }
    if idx as usize > panel.n_months() {
        return Err(Error::WindowOutOfRange(format!(
            "{as_of} lies beyond the panel end"
        )));
    }
    Ok(idx as usize)
}

fn complete_columns(panel: &ReturnsPanel, rows: std::ops::Range<usize>) -> Vec<usize> {
    (0..panel.n_assets())
        .filter(|&c| rows.clone().all(|r| panel.get(r, c).is_some()))
        .collect()
}
