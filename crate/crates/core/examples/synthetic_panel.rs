//! Generate a seeded synthetic market, write it as CSV and read it back.
//!
//!     cargo run --example synthetic_panel [out_dir]

use hrplab::market_data::{
    generate_synthetic, load_factors_csv, load_returns_csv, load_riskfree_csv, write_factors_csv,
    write_returns_csv, write_riskfree_csv, SyntheticSpec,
};

fn main() -> hrplab::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("hrplab-synthetic"));
    std::fs::create_dir_all(&out).expect("create output directory");

    let spec = SyntheticSpec {
        n_assets: 12,
        n_sectors: 3,
        n_months: 120,
        seed: 7,
        ..Default::default()
    };
    let (panel, rf, factors) = generate_synthetic(&spec)?;
    write_returns_csv(&panel, out.join("returns.csv"))?;
    write_riskfree_csv(&rf, out.join("rf.csv"))?;
    write_factors_csv(&factors, out.join("factors.csv"))?;

    let back = load_returns_csv(out.join("returns.csv"))?;
    assert_eq!(back, panel);
    load_riskfree_csv(out.join("rf.csv"))?;
    load_factors_csv(out.join("factors.csv"))?;

    println!(
        "{} assets x {} months ({} .. {}) written to {}",
        panel.n_assets(),
        panel.n_months(),
        panel.dates()[0],
        panel.dates()[panel.n_months() - 1],
        out.display()
    );
    println!("asset i belongs to sector i % {}", spec.n_sectors);
    let first: Vec<String> = panel
        .row(0)
        .iter()
        .map(|v| format!("{:+.4}", v.unwrap()))
        .collect();
    println!("first row: {}", first.join(" "));
    Ok(())
}
