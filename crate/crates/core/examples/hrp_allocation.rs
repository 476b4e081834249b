//! Hierarchical risk parity weights from a 60-month look-back of synthetic
//! excess returns, with the intermediate tree and seriation.
//!
//!     cargo run --example hrp_allocation

use hrplab::allocation::{hrp, recursive_bisection};
use hrplab::estimation::{sample_covariance, AssetMatrix};
use hrplab::hcluster::Seriation;
use hrplab::market_data::{excess_returns, generate_synthetic, lookback_window, SyntheticSpec};

fn main() -> hrplab::Result<()> {
    let (panel, rf, _) = generate_synthetic(&SyntheticSpec {
        n_assets: 9,
        n_sectors: 3,
        n_months: 72,
        ..Default::default()
    })?;
    let as_of = panel.dates()[60];
    let lb = excess_returns(&lookback_window(&panel, as_of, 60)?, &rf)?;
    let cov = sample_covariance(&lb)?;
    let alloc = hrp(&cov)?;

    let order: Vec<&str> = alloc
        .seriation
        .order
        .iter()
        .map(|&i| cov.assets()[i].as_str())
        .collect();
    println!("allocation at {as_of}, seriation: {}", order.join(" "));
    println!("{:<6} {:>9} {:>9}", "asset", "vol %", "weight");
    for (i, a) in cov.assets().iter().enumerate() {
        println!(
            "{a:<6} {:>9.2} {:>9.4}",
            100.0 * cov.matrix[(i, i)].sqrt(),
            alloc.weights.weights[i]
        );
    }
    println!("sum of weights: {:.12}", alloc.weights.net_exposure());

    // bisection on the unclustered order, for comparison
    let naive = recursive_bisection(&cov, &Seriation::identity(cov.len()))?;
    let diff: f64 = naive
        .weights
        .iter()
        .zip(&alloc.weights.weights)
        .map(|(a, b)| (a - b).abs())
        .sum();
    println!("L1 change vs. identity order: {diff:.4}");
    Ok(())
}
