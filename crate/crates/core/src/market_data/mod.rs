//! Monthly return panels: loading, excess returns, windowing and synthetic data.

mod csv_io;
mod month;
mod panel;
mod synthetic;

pub(crate) use csv_io::write_file;
pub use csv_io::{
    load_factors_csv, load_returns_csv, load_riskfree_csv, write_factors_csv, write_returns_csv,
    write_riskfree_csv,
};
pub use month::Month;
pub use panel::{
    excess_returns, lookback_window, window, FactorSeries, ReturnsPanel, RiskFreeSeries,
    WindowSpec, FACTOR_NAMES,
};
pub use synthetic::{generate_synthetic, SyntheticSpec};
