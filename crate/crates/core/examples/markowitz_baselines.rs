//! Global minimum variance, tangency and equal weighting, and what shrinkage
//! does to a short look-back.
//!
//!     cargo run --example markowitz_baselines

use hrplab::allocation::{equal_weight, markowitz_gmv, markowitz_tangency, reciprocal_condition};
use hrplab::estimation::{sample_covariance, shrink};
use hrplab::market_data::{excess_returns, generate_synthetic, lookback_window, SyntheticSpec};

fn show(label: &str, w: &[f64]) {
    let cells: Vec<String> = w.iter().map(|x| format!("{x:+.3}")).collect();
    println!("{label:<22} {}", cells.join(" "));
}

fn main() -> hrplab::Result<()> {
    let (panel, rf, _) = generate_synthetic(&SyntheticSpec {
        n_assets: 8,
        n_months: 80,
        ..Default::default()
    })?;
    let as_of = panel.dates()[72];
    for lookback in [12, 60] {
        let lb = excess_returns(&lookback_window(&panel, as_of, lookback)?, &rf)?;
        let cov = sample_covariance(&lb)?;
        println!(
            "\nlook-back {lookback}: rcond {:.2e}",
            reciprocal_condition(&cov.matrix)
        );
        let gmv = markowitz_gmv(&cov)?;
        show("gmv raw (sum 1)", gmv.raw.as_ref().unwrap());
        show("gmv unit gross", &gmv.weights);
        let shrunk = markowitz_gmv(&shrink(&cov, 0.3)?)?;
        show("gmv, delta 0.3", &shrunk.weights);
        let mu: Vec<f64> = (0..lb.n_assets())
            .map(|j| lb.column(j).map(|r| r.unwrap()).sum::<f64>() / lb.n_months() as f64)
            .collect();
        match markowitz_tangency(&cov, &mu) {
            Ok(t) => show("tangency unit gross", &t.weights),
            Err(e) => println!("tangency: {e}"),
        }
    }
    show("\nequal weight", &equal_weight(panel.assets())?.weights);
    Ok(())
}
