//! Dendrogram and correlation heatmaps (original and seriated order) as SVG.
//!
//!     cargo run --example figures [out_dir]

use hrplab::estimation::{correlation, distance_matrix, sample_covariance, AssetMatrix};
use hrplab::hcluster::{quasi_diagonalize, reorder, single_linkage};
use hrplab::market_data::{excess_returns, generate_synthetic, lookback_window, SyntheticSpec};
use hrplab::report::{render_dendrogram_svg, render_heatmap_svg, HeatmapOrder};

fn main() -> hrplab::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("hrplab-figures"));
    std::fs::create_dir_all(&out).expect("create output directory");

    let (panel, rf, _) = generate_synthetic(&SyntheticSpec {
        n_assets: 15,
        n_months: 72,
        ..Default::default()
    })?;
    let lb = excess_returns(
        &lookback_window(&panel, panel.dates()[72 - 1].next(), 60)?,
        &rf,
    )?;
    let corr = correlation(&sample_covariance(&lb)?)?;
    let tree = single_linkage(&distance_matrix(&corr))?;
    let order = quasi_diagonalize(&tree)?;

    let files = [
        (
            "dendrogram.svg",
            render_dendrogram_svg(&tree, corr.assets())?,
        ),
        (
            "heatmap_original.svg",
            render_heatmap_svg(&corr, HeatmapOrder::Original)?,
        ),
        (
            "heatmap_seriated.svg",
            render_heatmap_svg(&corr, HeatmapOrder::Seriated(Some(&order)))?,
        ),
    ];
    for (name, svg) in &files {
        std::fs::write(out.join(name), svg).expect("write svg");
        println!("wrote {}", out.join(name).display());
    }

    let seriated = reorder(&corr, &order)?;
    seriated.write_csv(out.join("correlation_seriated.csv"))?;
    println!("seriated order: {}", seriated.assets().join(" "));
    Ok(())
}
