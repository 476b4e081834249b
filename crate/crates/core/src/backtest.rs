//! Rolling buy-and-hold backtest.
//!
//! Rebalances tile the evaluation span: the first allocation happens at the
//! first month with a full look-back behind it, then every `hold_months`.
//! Within a holding block positions are not traded, so weights drift with
//! relative performance. Windows are independent and may be evaluated in
//! parallel; results are merged in date order.

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{self, AllocationConfig, Method, SideRule, WeightVector};
use crate::error::{Error, Result};
use crate::market_data::{
    excess_returns, window, FactorSeries, Month, ReturnsPanel, RiskFreeSeries, WindowSpec,
};
use crate::metrics::{summarize, MetricsRow};

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestConfig {
    pub lookback_months: usize,
    pub hold_months: usize,
    pub methods: Vec<Method>,
    pub side_rule: SideRule,
    pub shrinkage_delta: f64,
    /// Earliest allowed rebalance month.
    pub start: Option<Month>,
    /// Last month that may be evaluated.
    pub end: Option<Month>,
    pub downturn_threshold: f64,
    /// Report metrics for downturn months only.
    pub downturns_only: bool,
    /// Worker threads for window evaluation; 0 picks the number of processors.
    /// Has no effect on results.
    pub jobs: usize,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            lookback_months: 12,
            hold_months: 3,
            methods: vec![Method::Hrp, Method::Gmv, Method::EqualWeight],
            side_rule: SideRule::MomentumSign,
            shrinkage_delta: 0.0,
            start: None,
            end: None,
            downturn_threshold: 0.0,
            downturns_only: false,
            jobs: 0,
        }
    }
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.lookback_months < 2 {
            return bad(format!(
                "look-back must be at least 2 months, got {}",
                self.lookback_months
            ));
        }
        if self.hold_months < 1 {
            return bad("holding period must be at least 1 month".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return bad(format!("method {m} listed twice"));
            }
        }
        if !(0.0..=1.0).contains(&self.shrinkage_delta) {
            return bad(format!(
                "shrinkage delta must be in [0, 1], got {}",
                self.shrinkage_delta
            ));
        }
        if !self.downturn_threshold.is_finite() {
            return bad("downturn threshold must be finite".into());
        }
        Ok(())
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            lookback_months: self.lookback_months,
            hold_months: self.hold_months,
            methods: self.methods.iter().map(|m| m.tag().to_string()).collect(),
            side_rule: self.side_rule.tag().to_string(),
            shrinkage_delta: self.shrinkage_delta,
            start: self.start,
            end: self.end,
            downturn_threshold: self.downturn_threshold,
            downturns_only: self.downturns_only,
        }
    }
}

/// Configuration as recorded in a report. Omits scheduling knobs that cannot
/// change results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub lookback_months: usize,
    pub hold_months: usize,
    pub methods: Vec<String>,
    pub side_rule: String,
    pub shrinkage_delta: f64,
    pub start: Option<Month>,
    pub end: Option<Month>,
    pub downturn_threshold: f64,
    pub downturns_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSeries {
    pub dates: Vec<Month>,
    pub excess: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rebalance {
    pub as_of: Month,
    pub weights: IndexMap<String, f64>,
    pub sides: IndexMap<String, i8>,
    /// `None` at the first rebalance, which has no previous portfolio.
    pub turnover: Option<f64>,
    /// Budget-constrained Markowitz weights before gross scaling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_weights: Option<IndexMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetMetrics {
    pub all: Option<MetricsRow>,
    pub downturn: Option<MetricsRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub dates: Vec<Month>,
    pub excess_returns: Vec<f64>,
    pub rebalances: Vec<Rebalance>,
    pub metrics: SubsetMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub config: ConfigEcho,
    pub market: MarketSeries,
    pub strategies: IndexMap<String, StrategyReport>,
}

impl BacktestReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serialisable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Data(format!("invalid report JSON: {e}")))
    }
}

/// Result of holding a portfolio through one block.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldResult {
    pub excess: Vec<f64>,
    pub raw: Vec<f64>,
    pub end_weights: WeightVector,
}

/// Buy-and-hold accounting over `holding`: each month `r_p = sum w_i r_i`,
/// then `w_i <- w_i (1 + r_i) / (1 + r_p)`.
///
/// Any weight not invested (`1 - net exposure`) sits in cash at a zero raw return.
pub fn hold_period_returns(
    w0: &WeightVector,
    holding: &ReturnsPanel,
    rf: &RiskFreeSeries,
) -> Result<HoldResult> {
    if w0.assets != holding.assets() {
        return Err(Error::UniverseMismatch(
            "weights and holding panel cover different assets".into(),
        ));
    }
    let mut w = w0.weights.clone();
    let mut excess = Vec::with_capacity(holding.n_months());
    let mut raw = Vec::with_capacity(holding.n_months());
    for (t, &date) in holding.dates().iter().enumerate() {
        let r: Vec<f64> = holding
            .row(t)
            .iter()
            .zip(holding.assets())
            .map(|(v, a)| v.ok_or_else(|| Error::Data(format!("missing return for {a} at {date}"))))
            .collect::<Result<_>>()?;
        let rp: f64 = w.iter().zip(&r).map(|(wi, ri)| wi * ri).sum();
        let growth = 1.0 + rp;
        if !(growth > 0.0) {
            return Err(Error::Numerical(format!(
                "portfolio return {rp} at {date} wipes out the position"
            )));
        }
        let rate = rf
            .rate(date)
            .ok_or_else(|| Error::Data(format!("risk-free series does not cover {date}")))?;
        for (wi, ri) in w.iter_mut().zip(&r) {
            *wi = *wi * (1.0 + ri) / growth;
        }
        raw.push(rp);
        excess.push(rp - rate);
    }
    Ok(HoldResult {
        excess,
        raw,
        end_weights: WeightVector {
            weights: w,
            raw: None,
            ..w0.clone()
        },
    })
}

/// Half the L1 distance between two weight vectors over the union of their
/// universes; an asset absent from one side counts as weight zero there.
pub fn turnover(prev: &WeightVector, new: &WeightVector) -> f64 {
    let mut total: f64 = new
        .assets
        .iter()
        .zip(&new.weights)
        .map(|(a, &w)| (w - prev.weight_of(a).unwrap_or(0.0)).abs())
        .sum();
    total += prev
        .assets
        .iter()
        .zip(&prev.weights)
        .filter(|(a, _)| new.weight_of(a).is_none())
        .map(|(_, w)| w.abs())
        .sum::<f64>();
    0.5 * total
}

/// Flags months whose `mkt_rf` is strictly below `threshold`.
pub fn downturn_mask(
    factors: &FactorSeries,
    months: &[Month],
    threshold: f64,
) -> Result<Vec<bool>> {
    months
        .iter()
        .map(|&m| {
            factors
                .value("mkt_rf", m)
                .map(|v| v < threshold)
                .ok_or_else(|| Error::Data(format!("factor series does not cover {m}")))
        })
        .collect()
}

/// Row indices of each rebalance in `panel`.
pub fn rebalance_schedule(panel: &ReturnsPanel, config: &BacktestConfig) -> Result<Vec<usize>> {
    let n = panel.n_months();
    let first_date = *panel
        .dates()
        .first()
        .ok_or_else(|| Error::Data("empty returns panel".into()))?;
    let index_of = |m: Month| m.ordinal() - first_date.ordinal();
    let mut first = config.lookback_months as i64;
    if let Some(start) = config.start {
        first = first.max(index_of(start));
    }
    let mut last = n as i64 - 1;
    if let Some(end) = config.end {
        last = last.min(index_of(end));
    }
    let hold = config.hold_months as i64;
    let schedule: Vec<usize> = (first..)
        .step_by(config.hold_months)
        .take_while(|&k| k + hold - 1 <= last)
        .map(|k| k as usize)
        .collect();
    if schedule.is_empty() {
        return Err(Error::WindowOutOfRange(format!(
            "panel of {n} months has no room for a {}-month look-back plus a {}-month holding period",
            config.lookback_months, config.hold_months
        )));
    }
    Ok(schedule)
}

struct WindowOutcome {
    as_of: Month,
    dates: Vec<Month>,
    per_method: Vec<(WeightVector, HoldResult)>,
}

fn evaluate_window(
    panel: &ReturnsPanel,
    rf: &RiskFreeSeries,
    config: &BacktestConfig,
    as_of_idx: usize,
) -> Result<WindowOutcome> {
    let spec = WindowSpec {
        as_of: panel.dates()[as_of_idx],
        lookback_months: config.lookback_months,
        hold_months: config.hold_months,
    };
    let (lookback_raw, holding) = window(panel, &spec)?;
    let lookback = excess_returns(&lookback_raw, rf)?;
    let per_method = config
        .methods
        .iter()
        .map(|&method| {
            let cfg = AllocationConfig {
                method,
                side_rule: config.side_rule.clone(),
                shrinkage_delta: config.shrinkage_delta,
            };
            let w = allocation::allocate(&lookback, &cfg).map_err(|e| match e {
                Error::Numerical(m) => Error::Numerical(format!("{method} at {}: {m}", spec.as_of)),
                other => other,
            })?;
            let held = hold_period_returns(&w, &holding, rf)?;
            Ok((w, held))
        })
        .collect::<Result<_>>()?;
    Ok(WindowOutcome {
        as_of: spec.as_of,
        dates: holding.dates().to_vec(),
        per_method,
    })
}

fn labelled<T: Copy>(assets: &[String], values: &[T]) -> IndexMap<String, T> {
    assets.iter().cloned().zip(values.iter().copied()).collect()
}

/// Runs every configured method through the rolling schedule.
pub fn run_backtest(
    panel: &ReturnsPanel,
    rf: &RiskFreeSeries,
    factors: &FactorSeries,
    config: &BacktestConfig,
) -> Result<BacktestReport> {
    config.validate()?;
    let schedule = rebalance_schedule(panel, config)?;

    let eval = |&k: &usize| evaluate_window(panel, rf, config, k);
    let outcomes: Vec<Result<WindowOutcome>> = if config.jobs == 1 {
        schedule.iter().map(eval).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        pool.install(|| schedule.par_iter().map(eval).collect())
    };
    // first failure in date order, independent of scheduling
    let outcomes: Vec<WindowOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let dates: Vec<Month> = outcomes
        .iter()
        .flat_map(|o| o.dates.iter().copied())
        .collect();
    let market_excess: Vec<f64> = dates
        .iter()
        .map(|&d| {
            factors
                .value("mkt_rf", d)
                .ok_or_else(|| Error::Data(format!("mkt_rf missing for {d}")))
        })
        .collect::<Result<_>>()?;
    let mask = downturn_mask(factors, &dates, config.downturn_threshold)?;

    let mut strategies = IndexMap::new();
    for (mi, method) in config.methods.iter().enumerate() {
        let mut excess = Vec::with_capacity(dates.len());
        let mut rebalances = Vec::with_capacity(outcomes.len());
        let mut prev_end: Option<&WeightVector> = None;
        for o in &outcomes {
            let (w, held) = &o.per_method[mi];
            rebalances.push(Rebalance {
                as_of: o.as_of,
                weights: labelled(&w.assets, &w.weights),
                sides: labelled(&w.assets, &w.signs()),
                turnover: prev_end.map(|p| turnover(p, w)),
                raw_weights: w.raw.as_ref().map(|r| labelled(&w.assets, r)),
            });
            excess.extend_from_slice(&held.excess);
            prev_end = Some(&held.end_weights);
        }
        let turnovers: Vec<f64> = rebalances.iter().filter_map(|r| r.turnover).collect();
        let avg_turnover =
            (!turnovers.is_empty()).then(|| turnovers.iter().sum::<f64>() / turnovers.len() as f64);
        let with_turnover = |row: Option<MetricsRow>| row.map(|r| MetricsRow { avg_turnover, ..r });
        let downturn: Vec<f64> = excess
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .map(|(&x, _)| x)
            .collect();
        let metrics = SubsetMetrics {
            all: if config.downturns_only {
                None
            } else {
                with_turnover(summarize(&excess).ok())
            },
            downturn: with_turnover(summarize(&downturn).ok()),
        };
        strategies.insert(
            method.tag().to_string(),
            StrategyReport {
                dates: dates.clone(),
                excess_returns: excess,
                rebalances,
                metrics,
            },
        );
    }

    Ok(BacktestReport {
        config: config.echo(),
        market: MarketSeries {
            dates,
            excess: market_excess,
        },
        strategies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{generate_synthetic, SyntheticSpec};

    fn months(start: &str, n: usize) -> Vec<Month> {
        let m: Month = start.parse().unwrap();
        (0..n).map(|i| m.offset(i as i64)).collect()
    }

    fn wv(assets: &[&str], weights: &[f64]) -> WeightVector {
        WeightVector {
            assets: assets.iter().map(|s| s.to_string()).collect(),
            weights: weights.to_vec(),
            method: Method::Hrp,
            raw: None,
        }
    }

    fn holding(rows: &[&[f64]], assets: &[&str]) -> ReturnsPanel {
        ReturnsPanel::new(
            months("2020-01", rows.len()),
            assets.iter().map(|s| s.to_string()).collect(),
            rows.iter()
                .map(|r| r.iter().map(|&v| Some(v)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn zero_rf(n: usize) -> RiskFreeSeries {
        RiskFreeSeries::new(months("2020-01", n), vec![0.0; n]).unwrap()
    }

    #[test]
    fn drift_after_offsetting_month() {
        let out = hold_period_returns(
            &wv(&["X", "Y"], &[0.5, 0.5]),
            &holding(&[&[0.1, -0.1]], &["X", "Y"]),
            &zero_rf(1),
        )
        .unwrap();
        assert_eq!(out.raw, vec![0.0]);
        assert!((out.end_weights.weights[0] - 0.55).abs() < 1e-15);
        assert!((out.end_weights.weights[1] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn single_asset_never_drifts() {
        let rf = RiskFreeSeries::new(months("2020-01", 2), vec![0.001, 0.002]).unwrap();
        let out = hold_period_returns(
            &wv(&["X"], &[1.0]),
            &holding(&[&[0.02], &[0.03]], &["X"]),
            &rf,
        )
        .unwrap();
        assert_eq!(out.raw, vec![0.02, 0.03]);
        assert!((out.excess[0] - 0.019).abs() < 1e-15 && (out.excess[1] - 0.028).abs() < 1e-15);
        assert!((out.end_weights.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wipeout_is_an_error() {
        let err = hold_period_returns(
            &wv(&["X", "Y"], &[2.0, -1.0]),
            &holding(&[&[-0.2, 0.6]], &["X", "Y"]),
            &zero_rf(1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn turnover_cases() {
        let a = wv(&["X", "Y"], &[0.6, 0.4]);
        assert_eq!(turnover(&a, &a), 0.0);
        assert_eq!(
            turnover(&wv(&["X", "Y"], &[1.0, 0.0]), &wv(&["X", "Y"], &[0.0, 1.0])),
            1.0
        );
        assert!((turnover(&a, &wv(&["X", "Y"], &[0.5, 0.5])) - 0.1).abs() < 1e-15);
        // Y exits, Z enters
        assert!((turnover(&a, &wv(&["X", "Z"], &[0.6, 0.4])) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn downturn_mask_cases() {
        let f = FactorSeries::new(
            months("2020-01", 4),
            vec!["mkt_rf".into()],
            vec![vec![0.02, -0.01, 0.03, -0.04]],
        )
        .unwrap();
        let m = months("2020-01", 4);
        assert_eq!(
            downturn_mask(&f, &m, 0.0).unwrap(),
            vec![false, true, false, true]
        );
        assert_eq!(downturn_mask(&f, &m, -1.0).unwrap(), vec![false; 4]);
        assert_eq!(downturn_mask(&f, &m, 1e9).unwrap(), vec![true; 4]);
        assert!(downturn_mask(&f, &months("2020-04", 2), 0.0).is_err());
    }

    fn synthetic(n_months: usize) -> (ReturnsPanel, RiskFreeSeries, FactorSeries) {
        generate_synthetic(&SyntheticSpec {
            n_assets: 6,
            n_sectors: 2,
            n_months,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn schedule_for_eighteen_months() {
        let (p, rf, f) = synthetic(18);
        let cfg = BacktestConfig::default();
        assert_eq!(rebalance_schedule(&p, &cfg).unwrap(), vec![12, 15]);
        let r = run_backtest(&p, &rf, &f, &cfg).unwrap();
        for s in r.strategies.values() {
            assert_eq!(s.excess_returns.len(), 6);
            assert_eq!(s.dates, &p.dates()[12..18]);
            assert_eq!(s.rebalances.len(), 2);
            assert_eq!(s.rebalances[0].turnover, None);
            assert!(s.rebalances[1].turnover.is_some());
        }
        assert_eq!(r.market.dates, &p.dates()[12..18]);
    }

    #[test]
    fn schedule_respects_start_and_end() {
        let (p, _, _) = synthetic(40);
        let cfg = BacktestConfig {
            start: Some(p.dates()[20]),
            end: Some(p.dates()[31]),
            ..Default::default()
        };
        assert_eq!(rebalance_schedule(&p, &cfg).unwrap(), vec![20, 23, 26, 29]);
    }

    #[test]
    fn lookback_longer_than_panel() {
        let (p, rf, f) = synthetic(60);
        let cfg = BacktestConfig {
            lookback_months: 120,
            ..Default::default()
        };
        assert!(matches!(
            run_backtest(&p, &rf, &f, &cfg),
            Err(Error::WindowOutOfRange(_))
        ));
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let (p, rf, f) = synthetic(60);
        let base = BacktestConfig {
            methods: vec![
                Method::Hrp,
                Method::Gmv,
                Method::Tangency,
                Method::EqualWeight,
            ],
            jobs: 1,
            ..Default::default()
        };
        let a = run_backtest(&p, &rf, &f, &base).unwrap();
        let b = run_backtest(
            &p,
            &rf,
            &f,
            &BacktestConfig {
                jobs: 4,
                ..base.clone()
            },
        )
        .unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a, BacktestReport::from_json(&a.to_json()).unwrap());
    }

    #[test]
    fn extra_months_after_end_change_nothing() {
        let (p, rf, f) = synthetic(60);
        let (short, _, _) = synthetic(45);
        let cfg = BacktestConfig {
            end: Some(short.dates()[44]),
            jobs: 1,
            ..Default::default()
        };
        let a = run_backtest(&p, &rf, &f, &cfg).unwrap();
        let b = run_backtest(&short, &rf, &f, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singular_covariance_without_shrinkage() {
        // 6 assets, 4-month look-back
        let (p, rf, f) = synthetic(30);
        let cfg = BacktestConfig {
            lookback_months: 4,
            methods: vec![Method::Gmv],
            jobs: 1,
            ..Default::default()
        };
        let err = run_backtest(&p, &rf, &f, &cfg).unwrap_err();
        assert!(err.to_string().contains("shrinkage"), "{err}");
        let shrunk = BacktestConfig {
            shrinkage_delta: 0.5,
            ..cfg
        };
        assert!(run_backtest(&p, &rf, &f, &shrunk).is_ok());
    }

    #[test]
    fn downturns_only_drops_full_sample_metrics() {
        let (p, rf, f) = synthetic(60);
        let cfg = BacktestConfig {
            downturns_only: true,
            jobs: 1,
            ..Default::default()
        };
        let r = run_backtest(&p, &rf, &f, &cfg).unwrap();
        for s in r.strategies.values() {
            assert!(s.metrics.all.is_none());
            let d = s.metrics.downturn.as_ref().unwrap();
            let n_down = r.market.excess.iter().filter(|&&m| m < 0.0).count();
            assert_eq!(d.n_months, n_down);
        }
    }

    #[test]
    fn holding_periods_tile_the_span() {
        let (p, rf, f) = synthetic(50);
        let r = run_backtest(
            &p,
            &rf,
            &f,
            &BacktestConfig {
                jobs: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let s = &r.strategies["hrp"];
        let mut seen = s.dates.clone();
        seen.dedup();
        assert_eq!(seen.len(), s.dates.len());
        assert!(s.dates.windows(2).all(|w| w[1] == w[0].next()));
        assert_eq!(s.dates.first(), Some(&p.dates()[12]));
        assert_eq!(s.dates.len(), 36);
    }

    #[test]
    fn hrp_rebalances_have_unit_gross() {
        let (p, rf, f) = synthetic(40);
        let r = run_backtest(
            &p,
            &rf,
            &f,
            &BacktestConfig {
                jobs: 1,
                ..Default::default()
            },
        )
        .unwrap();
        for s in r.strategies.values() {
            for rb in &s.rebalances {
                let gross: f64 = rb.weights.values().map(|w| w.abs()).sum();
                assert!((gross - 1.0).abs() < 1e-10);
            }
        }
    }
}
