use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monthly (not annualised) summary of an excess-return series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub mean_excess: f64,
    pub std_dev: f64,
    /// `None` when the series has zero dispersion.
    pub sharpe: Option<f64>,
    pub n_months: usize,
    pub avg_turnover: Option<f64>,
}

/// Mean, sample standard deviation (divisor `n - 1`) and their ratio.
pub fn summarize(excess: &[f64]) -> Result<MetricsRow> {
    let n = excess.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 observations to summarise, got {n}"
        )));
    }
    let mean = excess.iter().sum::<f64>() / n as f64;
    let ss: f64 = excess.iter().map(|x| (x - mean) * (x - mean)).sum();
    let std_dev = (ss / (n as f64 - 1.0)).sqrt();
    let sharpe = (std_dev > 0.0).then(|| mean / std_dev);
    Ok(MetricsRow {
        mean_excess: mean,
        std_dev,
        sharpe,
        n_months: n,
        avg_turnover: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_point_fixture() {
        let m = summarize(&[0.01, 0.02, 0.03]).unwrap();
        assert!((m.mean_excess - 0.02).abs() <= 1e-15);
        assert!((m.std_dev - 0.01).abs() <= 1e-15);
        assert!((m.sharpe.unwrap() - 2.0).abs() <= 1e-15);
        assert_eq!(m.n_months, 3);
    }

    #[test]
    fn constant_series_has_no_sharpe() {
        let m = summarize(&[0.01, 0.01]).unwrap();
        assert_eq!(m.std_dev, 0.0);
        assert_eq!(m.sharpe, None);
        assert_eq!(
            serde_json::to_value(&m).unwrap()["sharpe"],
            serde_json::Value::Null
        );
    }

    #[test]
    fn single_observation_is_an_error() {
        assert!(summarize(&[0.01]).is_err());
        assert!(summarize(&[]).is_err());
    }

    proptest! {
        #[test]
        fn translation_and_scale(
            xs in prop::collection::vec(-0.2f64..0.2, 2..50),
            c in -0.1f64..0.1,
            k in 0.1f64..10.0,
        ) {
            let base = summarize(&xs).unwrap();
            prop_assume!(base.std_dev > 1e-6);
            let shifted = summarize(&xs.iter().map(|x| x + c).collect::<Vec<_>>()).unwrap();
            prop_assert!((shifted.mean_excess - base.mean_excess - c).abs() < 1e-12);
            prop_assert!((shifted.std_dev - base.std_dev).abs() < 1e-12);
            let scaled = summarize(&xs.iter().map(|x| x * k).collect::<Vec<_>>()).unwrap();
            prop_assert!((scaled.mean_excess - k * base.mean_excess).abs() < 1e-12);
            prop_assert!((scaled.std_dev - k * base.std_dev).abs() < 1e-12);
            prop_assert!((scaled.sharpe.unwrap() - base.sharpe.unwrap()).abs() < 1e-9);
        }
    }
}
