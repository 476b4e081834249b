//! Metrics restricted to months with a negative market excess return, as CSV
//! and JSON, including the market benchmark rows.
//!
//!     cargo run --example downturn_report

use hrplab::backtest::{downturn_mask, run_backtest, BacktestConfig};
use hrplab::market_data::{generate_synthetic, SyntheticSpec};
use hrplab::report::{render_table, TableFormat, TableOptions};

fn main() -> hrplab::Result<()> {
    let (panel, rf, factors) = generate_synthetic(&SyntheticSpec {
        n_months: 120,
        ..Default::default()
    })?;
    let cfg = BacktestConfig::default();
    let report = run_backtest(&panel, &rf, &factors, &cfg)?;

    let dates = &report.market.dates;
    let mask = downturn_mask(&factors, dates, cfg.downturn_threshold)?;
    println!(
        "{} of {} evaluated months are downturns (mkt_rf < {})",
        mask.iter().filter(|&&d| d).count(),
        dates.len(),
        cfg.downturn_threshold
    );

    let opts = TableOptions {
        styled: false,
        include_market: true,
    };
    print!("\n{}", render_table(&report, TableFormat::Csv, opts));

    let only = run_backtest(
        &panel,
        &rf,
        &factors,
        &BacktestConfig {
            downturns_only: true,
            ..cfg
        },
    )?;
    print!(
        "\n{}",
        render_table(&only, TableFormat::Json, TableOptions::default())
    );
    Ok(())
}
