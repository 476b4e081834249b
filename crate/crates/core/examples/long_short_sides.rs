//! Turning long-only HRP weights into a long-short book with per-asset sides.
//!
//!     cargo run --example long_short_sides

use hrplab::allocation::{apply_sides, assign_sides, hrp, SideRule};
use hrplab::estimation::sample_covariance;
use hrplab::market_data::{excess_returns, generate_synthetic, lookback_window, SyntheticSpec};
use indexmap::IndexMap;

fn main() -> hrplab::Result<()> {
    let (panel, rf, _) = generate_synthetic(&SyntheticSpec {
        n_assets: 6,
        n_sectors: 2,
        n_months: 40,
        ..Default::default()
    })?;
    let lb = excess_returns(&lookback_window(&panel, panel.dates()[36], 12)?, &rf)?;
    let base = hrp(&sample_covariance(&lb)?)?.weights;

    let explicit: IndexMap<String, i8> = lb
        .assets()
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), if i % 2 == 0 { 1 } else { -1 }))
        .collect();
    for rule in [
        SideRule::AllLong,
        SideRule::MomentumSign,
        SideRule::Explicit(explicit),
    ] {
        let sides = assign_sides(&lb, &rule)?;
        let w = apply_sides(&base, &sides)?;
        let cells: Vec<String> = w
            .assets
            .iter()
            .zip(&w.weights)
            .map(|(a, x)| format!("{a} {x:+.3}"))
            .collect();
        println!("{:<14} {}", rule.tag(), cells.join("  "));
        println!(
            "{:<14} gross {:.3}, net {:+.3}",
            "",
            w.gross_exposure(),
            w.net_exposure()
        );
    }
    Ok(())
}
