//! Covariance, correlation, shrinkage and the correlation distance.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::market_data::{write_file, ReturnsPanel};

/// Square matrices labelled by an asset universe.
pub trait AssetMatrix: Sized {
    fn assets(&self) -> &[String];
    fn matrix(&self) -> &DMatrix<f64>;
    /// Same kind of matrix over a relabelled universe. Callers keep the invariants.
    fn with_parts(&self, assets: Vec<String>, matrix: DMatrix<f64>) -> Self;

    fn len(&self) -> usize {
        self.assets().len()
    }

    fn is_empty(&self) -> bool {
        self.assets().is_empty()
    }

    /// CSV with a header row and a leading column of asset ids.
    fn to_csv(&self) -> String {
        let mut out = String::from("asset");
        for a in self.assets() {
            out.push(',');
            out.push_str(a);
        }
        out.push('\n');
        let m = self.matrix();
        for (i, a) in self.assets().iter().enumerate() {
            out.push_str(a);
            for j in 0..m.ncols() {
                out.push_str(&format!(",{}", m[(i, j)]));
            }
            out.push('\n');
        }
        out
    }

    fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_csv())
    }
}

macro_rules! asset_matrix {
    ($ty:ident) => {
        impl AssetMatrix for $ty {
            fn assets(&self) -> &[String] {
                &self.assets
            }
            fn matrix(&self) -> &DMatrix<f64> {
                &self.matrix
            }
            #[allow(clippy::needless_update)]
            fn with_parts(&self, assets: Vec<String>, matrix: DMatrix<f64>) -> Self {
                Self {
                    assets,
                    matrix,
                    ..self.clone()
                }
            }
        }
    };
}

/// Sample covariance of monthly returns.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub assets: Vec<String>,
    pub matrix: DMatrix<f64>,
    pub lookback_months: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub assets: Vec<String>,
    pub matrix: DMatrix<f64>,
}

/// Pairwise `sqrt((1 - rho) / 2)` distances, all in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub assets: Vec<String>,
    pub matrix: DMatrix<f64>,
}

asset_matrix!(CovarianceEstimate);
asset_matrix!(CorrelationMatrix);
asset_matrix!(DistanceMatrix);

impl CovarianceEstimate {
    /// Wraps a caller-supplied matrix after checking symmetry and a positive diagonal.
    pub fn from_matrix(
        assets: Vec<String>,
        matrix: DMatrix<f64>,
        lookback_months: usize,
    ) -> Result<Self> {
        let n = assets.len();
        if n < 2 || matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "covariance must be N x N with N = {n} >= 2, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for i in 0..n {
            if !(matrix[(i, i)] > 0.0) {
                return Err(Error::ZeroVariance {
                    asset: assets[i].clone(),
                });
            }
            for j in 0..i {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "covariance is not symmetric at ({}, {})",
                        assets[i], assets[j]
                    )));
                }
            }
        }
        Ok(Self {
            assets,
            matrix,
            lookback_months,
        })
    }

    pub fn variances(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().copied().collect()
    }
}

/// Unbiased (divisor `T - 1`) sample covariance of a complete look-back panel.
pub fn sample_covariance(panel: &ReturnsPanel) -> Result<CovarianceEstimate> {
    let t = panel.n_months();
    if t < 2 {
        return Err(Error::Data(format!(
            "need at least 2 months to estimate a covariance, got {t}"
        )));
    }
    if panel.n_assets() < 2 {
        return Err(Error::Data("need at least 2 assets".into()));
    }
    let x = panel.to_matrix()?;
    let means = x.row_mean();
    let mut centered = x;
    for mut row in centered.row_iter_mut() {
        row -= &means;
    }
    let mut cov = centered.transpose() * &centered / (t as f64 - 1.0);
    // enforce exact symmetry
    let n = cov.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    for (i, a) in panel.assets().iter().enumerate() {
        if !(cov[(i, i)] > 0.0) {
            return Err(Error::ZeroVariance { asset: a.clone() });
        }
    }
    Ok(CovarianceEstimate {
        assets: panel.assets().to_vec(),
        matrix: cov,
        lookback_months: t,
    })
}

/// Pearson correlation, clamped to `[-1, 1]` with an exact unit diagonal.
pub fn correlation(cov: &CovarianceEstimate) -> Result<CorrelationMatrix> {
    let var = cov.variances();
    if let Some((a, _)) = cov.assets.iter().zip(&var).find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::ZeroVariance { asset: a.clone() });
    }
    let n = var.len();
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            (cov.matrix[(i, j)] / (var[i] * var[j]).sqrt()).clamp(-1.0, 1.0)
        }
    });
    Ok(CorrelationMatrix {
        assets: cov.assets.clone(),
        matrix,
    })
}

/// Blends `cov` toward `trace(cov)/N * I`: `(1 - delta) cov + delta * mu I`.
pub fn shrink(cov: &CovarianceEstimate, delta: f64) -> Result<CovarianceEstimate> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidArgument(format!(
            "shrinkage delta must be in [0, 1], got {delta}"
        )));
    }
    if delta == 0.0 {
        return Ok(cov.clone());
    }
    let n = cov.len();
    let mu = cov.matrix.trace() / n as f64;
    let mut matrix = &cov.matrix * (1.0 - delta);
    for i in 0..n {
        matrix[(i, i)] += delta * mu;
    }
    Ok(CovarianceEstimate {
        matrix,
        ..cov.clone()
    })
}

pub fn distance_matrix(corr: &CorrelationMatrix) -> DistanceMatrix {
    let n = corr.len();
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            correlation_distance(corr.matrix[(i, j)])
        }
    });
    DistanceMatrix {
        assets: corr.assets.clone(),
        matrix,
    }
}

/// `sqrt(0.5 * (1 - rho))`: 0 for perfectly correlated, 1 for perfectly anti-correlated.
pub fn correlation_distance(rho: f64) -> f64 {
    (0.5 * (1.0 - rho.clamp(-1.0, 1.0))).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::Month;
    use proptest::prelude::*;

    fn panel(cols: &[&[f64]]) -> ReturnsPanel {
        let t = cols[0].len();
        let start: Month = "2020-01".parse().unwrap();
        let dates = (0..t).map(|i| start.offset(i as i64)).collect();
        let assets = (0..cols.len()).map(|j| format!("A{j}")).collect();
        let rows = (0..t)
            .map(|i| cols.iter().map(|c| Some(c[i])).collect())
            .collect();
        ReturnsPanel::new(dates, assets, rows).unwrap()
    }

    fn diag_cov(v: &[f64]) -> CovarianceEstimate {
        let n = v.len();
        CovarianceEstimate::from_matrix(
            (0..n).map(|i| format!("A{i}")).collect(),
            DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v)),
            12,
        )
        .unwrap()
    }

    #[test]
    fn identical_and_negated_columns() {
        // mean 0.02, deviations (-0.01, 0, 0.01): variance 2e-4 / 2 = 1e-4
        let x = [0.01, 0.02, 0.03];
        let c = sample_covariance(&panel(&[&x, &x])).unwrap();
        for v in c.matrix.iter() {
            assert!((v - 1e-4).abs() < 1e-18);
        }
        let neg = [-0.01, -0.02, -0.03];
        let c = sample_covariance(&panel(&[&x, &neg])).unwrap();
        assert!((c.matrix[(0, 1)] + 1e-4).abs() < 1e-18);
        assert!((c.matrix[(1, 1)] - 1e-4).abs() < 1e-18);

        let rho = correlation(&sample_covariance(&panel(&[&x, &x])).unwrap()).unwrap();
        assert_eq!(rho.matrix[(0, 1)], 1.0);
        let rho = correlation(&c).unwrap();
        assert_eq!(rho.matrix[(0, 1)], -1.0);
    }

    #[test]
    fn covariance_errors() {
        assert!(sample_covariance(&panel(&[&[0.01], &[0.02]])).is_err());
        let err = sample_covariance(&panel(&[&[0.01, 0.02], &[0.03, 0.03]])).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance { ref asset } if asset == "A1"));
    }

    #[test]
    fn diagonal_covariance_gives_identity() {
        let rho = correlation(&diag_cov(&[0.04, 0.01, 0.09])).unwrap();
        assert_eq!(rho.matrix, DMatrix::identity(3, 3));
    }

    #[test]
    fn shrink_endpoints_and_midpoint() {
        let c = diag_cov(&[0.04, 0.01]);
        assert_eq!(shrink(&c, 0.0).unwrap(), c);
        let full = shrink(&c, 1.0).unwrap();
        assert!((full.matrix[(0, 0)] - 0.025).abs() < 1e-15);
        assert!((full.matrix[(1, 1)] - 0.025).abs() < 1e-15);
        assert_eq!(full.matrix[(0, 1)], 0.0);
        let half = shrink(&c, 0.5).unwrap();
        assert!((half.matrix[(0, 0)] - 0.0325).abs() < 1e-15);
        assert!((half.matrix[(1, 1)] - 0.0175).abs() < 1e-15);
        assert!(shrink(&c, 1.5).is_err());
        assert!(shrink(&c, -0.1).is_err());
    }

    #[test]
    fn distance_endpoints() {
        assert_eq!(correlation_distance(1.0), 0.0);
        assert_eq!(correlation_distance(-1.0), 1.0);
        assert!((correlation_distance(0.0) - 0.5f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn csv_export_has_labels() {
        let csv = diag_cov(&[0.04, 0.01]).to_csv();
        assert_eq!(csv, "asset,A0,A1\nA0,0.04,0\nA1,0,0.01\n");
    }

    fn random_panel() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
        (2usize..6, 4usize..20).prop_flat_map(|(n, t)| {
            (
                prop::collection::vec(prop::collection::vec(-0.3f64..0.3, t), n),
                prop::collection::vec(0.1f64..3.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn correlation_is_scale_invariant((cols, scales) in random_panel()) {
            prop_assume!(cols.iter().all(|c| {
                let m = c.iter().sum::<f64>() / c.len() as f64;
                c.iter().map(|x| (x - m).powi(2)).sum::<f64>() > 1e-6
            }));
            let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
            let scaled: Vec<Vec<f64>> = cols.iter().zip(&scales)
                .map(|(c, k)| c.iter().map(|x| x * k).collect()).collect();
            let srefs: Vec<&[f64]> = scaled.iter().map(Vec::as_slice).collect();
            let a = correlation(&sample_covariance(&panel(&refs)).unwrap()).unwrap();
            let b = correlation(&sample_covariance(&panel(&srefs)).unwrap()).unwrap();
            let (da, db) = (distance_matrix(&a), distance_matrix(&b));
            for (x, y) in a.matrix.iter().zip(b.matrix.iter()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            for (x, y) in da.matrix.iter().zip(db.matrix.iter()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn distance_decreases_in_rho(a in -1.0f64..=1.0, b in -1.0f64..=1.0) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(correlation_distance(lo) >= correlation_distance(hi));
            let (dl, dh) = (correlation_distance(lo), correlation_distance(hi));
            prop_assert!((0.0..=1.0).contains(&dl) && (0.0..=1.0).contains(&dh));
        }

        #[test]
        fn shrink_keeps_trace_and_unit_correlation((cols, _) in random_panel(), delta in 0.0f64..=1.0) {
            let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
            let cov = sample_covariance(&panel(&refs)).unwrap();
            let s = shrink(&cov, delta).unwrap();
            prop_assert!((s.matrix.trace() - cov.matrix.trace()).abs() < 1e-12);
            prop_assert!((&s.matrix - s.matrix.transpose()).amax() < 1e-15);
            let rho = correlation(&s).unwrap();
            for i in 0..rho.len() {
                prop_assert_eq!(rho.matrix[(i, i)], 1.0);
            }
        }
    }
}
