//! Seeded one-factor-plus-sectors return generator.
//!
//! Asset `i` belongs to sector `i % n_sectors`. Each month
//!
//! ```text
//! excess_i = beta_i * market + loading_i * sector[i % K] + idio_i
//! return_i = excess_i + rf_const
//! ```
//!
//! with `market ~ N(0, market_vol^2)`, `sector_k ~ N(0, sector_vol^2)` and
//! `idio_i ~ N(0, idio_vol^2)`, all independent.
//!
//! # Random stream
//!
//! The stream is fixed so other implementations can reproduce it bit for bit:
//!
//! * generator: xoshiro256++ seeded with `seed_from_u64(seed)` (SplitMix64 state expansion);
//! * uniform: `(next_u64() >> 11) * 2^-53`, in `[0, 1)`;
//! * normal: Box-Muller cosine branch, `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`, two
//!   uniforms per draw, `u1` first;
//! * order: all betas (asset order), then all sector loadings (asset order), then
//!   month by month: the market draw, the `K` sector draws, the `N` idiosyncratic draws.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::month::Month;
use super::panel::{FactorSeries, ReturnsPanel, RiskFreeSeries};
use crate::error::{Error, Result};

/// Parameters of the synthetic market. [`Default`] is the shipped default scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_assets: usize,
    pub n_sectors: usize,
    pub n_months: usize,
    pub seed: u64,
    pub market_beta_range: (f64, f64),
    pub sector_loading_range: (f64, f64),
    pub idio_vol: f64,
    pub sector_vol: f64,
    pub market_vol: f64,
    pub rf_const: f64,
    /// First generated month.
    pub start: Month,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_assets: 10,
            n_sectors: 3,
            n_months: 252,
            seed: 42,
            market_beta_range: (0.5, 1.5),
            sector_loading_range: (0.5, 1.5),
            idio_vol: 0.05,
            sector_vol: 0.03,
            market_vol: 0.045,
            rf_const: 0.003,
            start: Month::new(2000, 1).expect("valid month"),
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_assets == 0 {
            return bad("n_assets must be positive".into());
        }
        if self.n_sectors == 0 || self.n_sectors > self.n_assets {
            return bad(format!(
                "n_sectors must be in 1..={}, got {}",
                self.n_assets, self.n_sectors
            ));
        }
        if self.n_months == 0 {
            return bad("n_months must be positive".into());
        }
        for (name, (lo, hi)) in [
            ("market_beta_range", self.market_beta_range),
            ("sector_loading_range", self.sector_loading_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("{name} [{lo}, {hi}] is not a non-empty interval"));
            }
        }
        for (name, v) in [
            ("idio_vol", self.idio_vol),
            ("sector_vol", self.sector_vol),
            ("market_vol", self.market_vol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !self.rf_const.is_finite() {
            return bad("rf_const must be finite".into());
        }
        Ok(())
    }
}

struct Stream(Xoshiro256PlusPlus);

impl Stream {
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn between(&mut self, (lo, hi): (f64, f64)) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    fn normal(&mut self, sd: f64) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        sd * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Generates returns, a constant risk-free series and an `mkt_rf`-only factor
/// series. Pure function of `spec`.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
) -> Result<(ReturnsPanel, RiskFreeSeries, FactorSeries)> {
    spec.validate()?;
    let (n, k) = (spec.n_assets, spec.n_sectors);
    let mut rng = Stream(Xoshiro256PlusPlus::seed_from_u64(spec.seed));

    let betas: Vec<f64> = (0..n)
        .map(|_| rng.between(spec.market_beta_range))
        .collect();
    let loadings: Vec<f64> = (0..n)
        .map(|_| rng.between(spec.sector_loading_range))
        .collect();

    let dates: Vec<Month> = (0..spec.n_months)
        .map(|t| spec.start.offset(t as i64))
        .collect();
    let mut rows = Vec::with_capacity(spec.n_months);
    let mut market = Vec::with_capacity(spec.n_months);
    let mut sectors = vec![0.0; k];
    for _ in 0..spec.n_months {
        let m = rng.normal(spec.market_vol);
        for s in sectors.iter_mut() {
            *s = rng.normal(spec.sector_vol);
        }
        let row = (0..n)
            .map(|i| {
                let idio = rng.normal(spec.idio_vol);
                Some(betas[i] * m + loadings[i] * sectors[i % k] + idio + spec.rf_const)
            })
            .collect();
        rows.push(row);
        market.push(m);
    }

    let width = n.to_string().len();
    let assets = (1..=n).map(|i| format!("A{i:0width$}")).collect();
    let panel = ReturnsPanel::new(dates.clone(), assets, rows)?;
    let rf = RiskFreeSeries::new(dates.clone(), vec![spec.rf_const; spec.n_months])?;
    let factors = FactorSeries::new(dates, vec!["mkt_rf".into()], vec![market])?;
    Ok((panel, rf, factors))
}
