//! Portfolio weights: hierarchical risk parity, long-short sides, Markowitz
//! baselines and equal weighting.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimation::{self, AssetMatrix, CovarianceEstimate};
use crate::hcluster::{self, LinkageTree, Seriation};
use crate::market_data::ReturnsPanel;

/// Smallest reciprocal condition number accepted before inverting a covariance.
pub const MIN_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Hrp,
    Gmv,
    Tangency,
    EqualWeight,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Hrp => "hrp",
            Method::Gmv => "gmv",
            Method::Tangency => "tangency",
            Method::EqualWeight => "equal_weight",
        }
    }

    pub fn needs_inverse(self) -> bool {
        matches!(self, Method::Gmv | Method::Tangency)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "hrp" => Ok(Method::Hrp),
            "gmv" | "markowitz" => Ok(Method::Gmv),
            "tangency" => Ok(Method::Tangency),
            "equal" | "equal_weight" => Ok(Method::EqualWeight),
            other => Err(Error::InvalidArgument(format!(
                "unknown method {other:?}; expected hrp, gmv, tangency or equal"
            ))),
        }
    }
}

/// Signed weights over a universe, scaled to unit gross exposure.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub assets: Vec<String>,
    pub weights: Vec<f64>,
    pub method: Method,
    /// Unscaled closed-form solution (budget `sum w = 1`), kept for Markowitz methods.
    pub raw: Option<Vec<f64>>,
}

impl WeightVector {
    pub fn gross_exposure(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    pub fn net_exposure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn weight_of(&self, asset: &str) -> Option<f64> {
        self.assets
            .iter()
            .position(|a| a == asset)
            .map(|i| self.weights[i])
    }

    /// +1 for non-negative weights, -1 otherwise.
    pub fn signs(&self) -> Vec<i8> {
        self.weights
            .iter()
            .map(|&w| if w < 0.0 { -1 } else { 1 })
            .collect()
    }

    fn gross_scaled(assets: Vec<String>, raw: Vec<f64>, method: Method) -> Result<Self> {
        let gross: f64 = raw.iter().map(|w| w.abs()).sum();
        if !(gross.is_finite() && gross > 0.0) {
            return Err(Error::Numerical(format!(
                "{method} produced weights with gross exposure {gross}"
            )));
        }
        Ok(Self {
            assets,
            weights: raw.iter().map(|w| w / gross).collect(),
            method,
            raw: Some(raw),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SideRule {
    AllLong,
    MomentumSign,
    Explicit(IndexMap<String, i8>),
}

impl SideRule {
    pub fn tag(&self) -> &'static str {
        match self {
            SideRule::AllLong => "all_long",
            SideRule::MomentumSign => "momentum_sign",
            SideRule::Explicit(_) => "explicit",
        }
    }
}

/// Per-asset +1 (long) / -1 (short).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideAssignment {
    pub assets: Vec<String>,
    pub sides: Vec<i8>,
    pub rule: &'static str,
}

/// Variance of the inverse-variance portfolio over `members`.
pub fn cluster_variance(cov: &CovarianceEstimate, members: &[usize]) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("cluster has no members".into()));
    }
    let n = cov.len();
    if let Some(&bad) = members.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!(
            "member index {bad} out of range for {n} assets"
        )));
    }
    let inv: Vec<f64> = members.iter().map(|&i| 1.0 / cov.matrix[(i, i)]).collect();
    let total: f64 = inv.iter().sum();
    let u: Vec<f64> = inv.iter().map(|x| x / total).collect();
    let mut v = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for (b, &j) in members.iter().enumerate() {
            v += u[a] * u[b] * cov.matrix[(i, j)];
        }
    }
    Ok(v)
}

/// Top-down bisection of the seriated universe.
///
/// Each list of two or more assets splits at `len / 2` (the left half is the
/// smaller one for odd lengths). The left half's weights scale by
/// `1 - V_L / (V_L + V_R)` and the right half's by the complement, where `V`
/// is [`cluster_variance`].
pub fn recursive_bisection(cov: &CovarianceEstimate, s: &Seriation) -> Result<WeightVector> {
    let n = cov.len();
    if s.len() != n {
        return Err(Error::UniverseMismatch(format!(
            "seriation covers {} assets, covariance {n}",
            s.len()
        )));
    }
    Seriation::from_order(s.order.clone())?;
    let mut w = vec![1.0; n];
    let mut work: Vec<&[usize]> = vec![&s.order];
    while let Some(items) = work.pop() {
        if items.len() < 2 {
            continue;
        }
        let (left, right) = items.split_at(items.len() / 2);
        let vl = cluster_variance(cov, left)?;
        let vr = cluster_variance(cov, right)?;
        let alpha = 1.0 - vl / (vl + vr);
        for &i in left {
            w[i] *= alpha;
        }
        for &i in right {
            w[i] *= 1.0 - alpha;
        }
        work.push(right);
        work.push(left);
    }
    Ok(WeightVector {
        assets: cov.assets.clone(),
        weights: w,
        method: Method::Hrp,
        raw: None,
    })
}

/// Everything HRP computes on the way to its weights.
#[derive(Debug, Clone)]
pub struct HrpAllocation {
    pub tree: LinkageTree,
    pub seriation: Seriation,
    pub weights: WeightVector,
}

/// correlation -> distance -> single linkage -> seriation -> bisection.
pub fn hrp(cov: &CovarianceEstimate) -> Result<HrpAllocation> {
    let corr = estimation::correlation(cov)?;
    let dist = estimation::distance_matrix(&corr);
    let tree = hcluster::single_linkage(&dist)?;
    let seriation = hcluster::quasi_diagonalize(&tree)?;
    let weights = recursive_bisection(cov, &seriation)?;
    Ok(HrpAllocation {
        tree,
        seriation,
        weights,
    })
}

/// Chooses long/short per asset from a look-back panel of excess returns.
pub fn assign_sides(lookback: &ReturnsPanel, rule: &SideRule) -> Result<SideAssignment> {
    let assets = lookback.assets().to_vec();
    let sides = match rule {
        SideRule::AllLong => vec![1; assets.len()],
        SideRule::MomentumSign => (0..assets.len())
            .map(|j| {
                let growth = lookback.column(j).try_fold(1.0, |acc, r| {
                    r.map(|r| acc * (1.0 + r))
                        .ok_or_else(|| Error::Data(format!("missing return for {}", assets[j])))
                })?;
                Ok(if growth - 1.0 >= 0.0 { 1 } else { -1 })
            })
            .collect::<Result<_>>()?,
        SideRule::Explicit(map) => assets
            .iter()
            .map(|a| match map.get(a) {
                Some(&s) if s == 1 || s == -1 => Ok(s),
                Some(&s) => Err(Error::InvalidArgument(format!(
                    "side for {a} must be +1 or -1, got {s}"
                ))),
                None => Err(Error::InvalidArgument(format!(
                    "no side given for asset {a}"
                ))),
            })
            .collect::<Result<_>>()?,
    };
    Ok(SideAssignment {
        assets,
        sides,
        rule: rule.tag(),
    })
}

/// Flips the sign of each short asset in a long-only weight vector.
pub fn apply_sides(w: &WeightVector, sides: &SideAssignment) -> Result<WeightVector> {
    if w.assets != sides.assets {
        return Err(Error::UniverseMismatch(
            "side assignment and weights cover different assets".into(),
        ));
    }
    if let Some((a, x)) = w.assets.iter().zip(&w.weights).find(|(_, &x)| x < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sides apply to long-only weights; {a} has weight {x}"
        )));
    }
    Ok(WeightVector {
        weights: w
            .weights
            .iter()
            .zip(&sides.sides)
            .map(|(&x, &s)| f64::from(s) * x)
            .collect(),
        ..w.clone()
    })
}

/// `lambda_min / lambda_max` of a symmetric matrix; non-positive when indefinite.
pub fn reciprocal_condition(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigenvalues();
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        return 0.0;
    }
    min / max
}

fn solve(cov: &CovarianceEstimate, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let rcond = reciprocal_condition(&cov.matrix);
    if !(rcond >= MIN_RCOND) {
        return Err(Error::Singular { rcond });
    }
    let chol = cov
        .matrix
        .clone()
        .cholesky()
        .ok_or(Error::Singular { rcond })?;
    Ok(chol.solve(rhs))
}

/// Global minimum variance: `Sigma^-1 1 / (1' Sigma^-1 1)`.
///
/// `raw` holds the budget-constrained solution; `weights` is that vector
/// rescaled to unit gross exposure.
pub fn markowitz_gmv(cov: &CovarianceEstimate) -> Result<WeightVector> {
    let ones = DVector::from_element(cov.len(), 1.0);
    let x = solve(cov, &ones)?;
    let denom = x.sum();
    let raw: Vec<f64> = x.iter().map(|v| v / denom).collect();
    WeightVector::gross_scaled(cov.assets.clone(), raw, Method::Gmv)
}

/// Tangency portfolio: `Sigma^-1 mu / (1' Sigma^-1 mu)`.
pub fn markowitz_tangency(cov: &CovarianceEstimate, mean_excess: &[f64]) -> Result<WeightVector> {
    if mean_excess.len() != cov.len() {
        return Err(Error::UniverseMismatch(format!(
            "{} expected returns for {} assets",
            mean_excess.len(),
            cov.len()
        )));
    }
    let x = solve(cov, &DVector::from_column_slice(mean_excess))?;
    let denom = x.sum();
    if denom.abs() < 1e-12 {
        return Err(Error::Numerical(format!(
            "tangency normalisation 1' Sigma^-1 mu = {denom:e} is degenerate"
        )));
    }
    let raw: Vec<f64> = x.iter().map(|v| v / denom).collect();
    WeightVector::gross_scaled(cov.assets.clone(), raw, Method::Tangency)
}

pub fn equal_weight(assets: &[String]) -> Result<WeightVector> {
    if assets.is_empty() {
        return Err(Error::InvalidArgument(
            "equal weighting over an empty universe".into(),
        ));
    }
    let w = 1.0 / assets.len() as f64;
    Ok(WeightVector {
        assets: assets.to_vec(),
        weights: vec![w; assets.len()],
        method: Method::EqualWeight,
        raw: None,
    })
}

/// Settings for one allocation from a look-back window.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationConfig {
    pub method: Method,
    pub side_rule: SideRule,
    pub shrinkage_delta: f64,
}

/// The full per-date pipeline on a complete panel of look-back excess returns.
///
/// HRP gets sides applied; Markowitz weights are gross-scaled and keep their
/// own signs; equal weighting is long-only.
pub fn allocate(lookback_excess: &ReturnsPanel, cfg: &AllocationConfig) -> Result<WeightVector> {
    if cfg.method == Method::EqualWeight {
        return equal_weight(lookback_excess.assets());
    }
    let cov = estimation::shrink(
        &estimation::sample_covariance(lookback_excess)?,
        cfg.shrinkage_delta,
    )?;
    let (n, t) = (lookback_excess.n_assets(), lookback_excess.n_months());
    let singular_hint = |e: Error| {
        match e {
        Error::Singular { rcond } if n >= t => Error::Numerical(format!(
            "{n} assets with a {t}-month look-back give a singular covariance (rcond {rcond:.1e}); set a shrinkage delta > 0"
        )),
        other => other,
    }
    };
    match cfg.method {
        Method::Hrp => {
            let w = hrp(&cov)?.weights;
            apply_sides(&w, &assign_sides(lookback_excess, &cfg.side_rule)?)
        }
        Method::Gmv => markowitz_gmv(&cov).map_err(singular_hint),
        Method::Tangency => {
            let mu: Vec<f64> = lookback_excess
                .to_matrix()?
                .row_mean()
                .iter()
                .copied()
                .collect();
            markowitz_tangency(&cov, &mu).map_err(singular_hint)
        }
        Method::EqualWeight => unreachable!(),
    }
}
