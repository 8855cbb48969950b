//! Concentration bound values and degree-growth diagnostics computed from
//! exact expected adjacencies: the spectral deviation bounds for the
//! weighted and unweighted variants, the assumption predicates gating them,
//! the weighted-to-unweighted degree ratio envelope, and the log-log growth
//! exponent of the maximum expected degree.

use crate::expectation::{expected_adjacency, ExpectError, ExpectOptions, ExpectedMatrices};
use crate::model::{ModelConfig, ModelError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("epsilon = {epsilon} outside (0, 1)")]
    EpsilonOutOfRange { epsilon: f64 },
    #[error("max subgraph size M = {m} must be at least 2")]
    MaxSizeTooSmall { m: usize },
    #[error("mu = {mu} must be at least 1")]
    MuOutOfRange { mu: f64 },
    #[error("need at least {need} distinct sizes, got {got}")]
    TooFewSizes { need: usize, got: usize },
    #[error("maximum expected degree at n = {n} is zero, log-log fit undefined")]
    DegenerateSeries { n: usize },
    #[error(transparent)]
    Expect(#[from] ExpectError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Bound values and assumption predicates for one expected adjacency pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub epsilon: f64,
    /// Maximum subgraph size M.
    pub m: usize,
    pub delta_weighted: f64,
    pub delta_unweighted: f64,
    /// Weighted-to-unweighted degree ratio bound used by the unweighted
    /// deviation bound.
    pub mu: f64,
    /// Weighted deviation bound sqrt(4 M^2 delta_w ln(2n/eps)).
    pub prop1_bound: f64,
    /// Unweighted deviation bound 4 M^2 sqrt(mu delta_u ln(2n/eps)).
    pub prop2_bound: f64,
    /// Weighted deviation bound 4 M^2 sqrt(delta_w ln(2n/eps)) stated
    /// without the degree-ratio detour.
    pub cor1_bound: f64,
    /// delta_w > (4/9) ln(2n/eps): the weighted degree is large enough for
    /// the weighted bound to be meaningful.
    pub a1_pass: bool,
    /// delta_u > (16/mu) ln(2n/eps): same for the unweighted degree.
    pub a3_pass: bool,
    /// delta_w > 16 ln(2n/eps): the stronger degree condition.
    pub a4_pass: bool,
}

/// Header for serializing reports, one CSV row per size.
pub const BOUND_REPORT_HEADER: &str = "n,epsilon,m,delta_weighted,delta_unweighted,mu,\
prop1_bound,prop2_bound,cor1_bound,a1_pass,a3_pass,a4_pass";

impl BoundReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.epsilon,
            self.m,
            self.delta_weighted,
            self.delta_unweighted,
            self.mu,
            self.prop1_bound,
            self.prop2_bound,
            self.cor1_bound,
            self.a1_pass,
            self.a3_pass,
            self.a4_pass
        )
    }
}

/// Degree-ratio envelope over a size grid, with the per-size ratios that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MuEstimate {
    /// max over the grid of delta_w / delta_u, floored at 1.
    pub mu: f64,
    /// (n, ratio) per evaluated size.
    pub series: Vec<(usize, f64)>,
}

/// Least-squares growth exponent of the maximum expected weighted degree.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    /// Slope of ln delta_w against ln n.
    pub slope: f64,
    /// (n, delta_w) per evaluated size.
    pub series: Vec<(usize, f64)>,
}

/// Evaluates all bound formulas and assumption predicates at one size.
pub fn evaluate_bounds(
    expected: &ExpectedMatrices,
    m: usize,
    epsilon: f64,
    mu: f64,
) -> Result<BoundReport, BoundsError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(BoundsError::EpsilonOutOfRange { epsilon });
    }
    if m < 2 {
        return Err(BoundsError::MaxSizeTooSmall { m });
    }
    if !(mu >= 1.0) {
        return Err(BoundsError::MuOutOfRange { mu });
    }
    let n = expected.weighted.n();
    let delta_weighted = expected.delta_weighted();
    let delta_unweighted = expected.delta_unweighted();
    let log_term = (2.0 * n as f64 / epsilon).ln();
    let m2 = (m * m) as f64;
    Ok(BoundReport {
        n,
        epsilon,
        m,
        delta_weighted,
        delta_unweighted,
        mu,
        prop1_bound: (4.0 * m2 * delta_weighted * log_term).sqrt(),
        prop2_bound: 4.0 * m2 * (mu * delta_unweighted * log_term).sqrt(),
        cor1_bound: 4.0 * m2 * (delta_weighted * log_term).sqrt(),
        a1_pass: delta_weighted > 4.0 / 9.0 * log_term,
        a3_pass: delta_unweighted > 16.0 / mu * log_term,
        a4_pass: delta_weighted > 16.0 * log_term,
    })
}

/// Upper envelope of delta_w / delta_u over a size grid, from exact
/// expectations. A size with no expected weight contributes ratio 1: both
/// degrees vanish together.
pub fn estimate_mu(family: &ModelConfig, sizes: &[usize]) -> Result<MuEstimate, BoundsError> {
    if sizes.len() < 2 {
        return Err(BoundsError::TooFewSizes { need: 2, got: sizes.len() });
    }
    let mut series = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let expected = expected_adjacency(&family.at_size(n)?, &ExpectOptions::default())?;
        let delta_u = expected.delta_unweighted();
        let ratio = if delta_u > 0.0 { expected.delta_weighted() / delta_u } else { 1.0 };
        series.push((n, ratio));
    }
    let mu = series.iter().map(|&(_, r)| r).fold(1.0, f64::max);
    Ok(MuEstimate { mu, series })
}

/// Least-squares slope of ln delta_w against ln n over a size grid. Three
/// or more sizes spanning a decade give a stable estimate; two distinct
/// sizes are the mathematical minimum.
pub fn fit_growth_exponent(family: &ModelConfig, sizes: &[usize]) -> Result<GrowthFit, BoundsError> {
    let mut distinct: Vec<usize> = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(BoundsError::TooFewSizes { need: 2, got: distinct.len() });
    }
    let mut series = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let expected = expected_adjacency(&family.at_size(n)?, &ExpectOptions::default())?;
        let delta = expected.delta_weighted();
        if delta <= 0.0 {
            return Err(BoundsError::DegenerateSeries { n });
        }
        series.push((n, delta));
    }
    let points: Vec<(f64, f64)> =
        series.iter().map(|&(n, d)| ((n as f64).ln(), d.ln())).collect();
    let count = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / count;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in points {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    Ok(GrowthFit { slope: cov / var, series })
}
