//! Rolling 3-month buy-and-hold backtest with 12-, 60- and 120-month
//! look-backs over a common evaluation span.
//!
//!     cargo run --release --example backtest_lookbacks

use hrplab::allocation::Method;
use hrplab::backtest::{run_backtest, BacktestConfig};
use hrplab::market_data::{generate_synthetic, SyntheticSpec};
use hrplab::report::{render_table, TableFormat, TableOptions};

fn main() -> hrplab::Result<()> {
    let (panel, rf, factors) = generate_synthetic(&SyntheticSpec::default())?;
    let start = panel.dates()[120];
    for lookback in [12, 60, 120] {
        let cfg = BacktestConfig {
            lookback_months: lookback,
            methods: vec![Method::Hrp, Method::Gmv, Method::EqualWeight],
            start: Some(start),
            ..Default::default()
        };
        let report = run_backtest(&panel, &rf, &factors, &cfg)?;
        println!("look-back {lookback} months, rebalancing from {start}:");
        print!(
            "{}",
            render_table(&report, TableFormat::Table, TableOptions::default())
        );
        println!();
    }
    Ok(())
}
