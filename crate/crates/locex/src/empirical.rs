//! Local empirical measures: estimation of the latent measure process at a
//! query covariate from observations at nearby covariates.
//!
//! The estimator is a weighted atom measure `sum_t w_t(query) * delta_{X_t}`
//! whose weights live on the probability simplex. The weights minimize an
//! expected-squared-error bound of the form `1/4 w'w + w'b`, where `b_t`
//! bounds the bias of borrowing the observation at covariate `t` for the
//! query; the minimizer is the projection of `-2b` onto the simplex and has
//! a closed form after sorting `b`. Everything here depends on the data only
//! through the covariates and the test-function kind, so weights and error
//! bounds can be computed before any observation is collected.

use std::sync::Arc;

use crate::covariate::Covariate;
use crate::data::{ObservationSet, Value};
use crate::error::{Error, Result};
use crate::premetric::PremetricSpec;

/// Shape of the test function `h : X -> [0, 1]` whose expectation under the
/// latent measure is being estimated. Indicators admit a tighter bias
/// coefficient than general bounded functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunctionKind {
    Indicator,
    Bounded,
}

/// A test function over observation values: an indicator of a set, or a
/// general map into `[0, 1]`.
#[derive(Clone)]
pub enum TestFunction {
    Indicator(Arc<dyn Fn(&Value) -> bool + Send + Sync>),
    Bounded(Arc<dyn Fn(&Value) -> f64 + Send + Sync>),
}

impl TestFunction {
    pub fn indicator(f: impl Fn(&Value) -> bool + Send + Sync + 'static) -> Self {
        TestFunction::Indicator(Arc::new(f))
    }

    /// Indicator of a single symbol.
    pub fn indicator_of_symbol(label: impl Into<String>) -> Self {
        let target = Value::Symbol(label.into());
        TestFunction::indicator(move |v| *v == target)
    }

    pub fn bounded(f: impl Fn(&Value) -> f64 + Send + Sync + 'static) -> Self {
        TestFunction::Bounded(Arc::new(f))
    }

    pub fn kind(&self) -> TestFunctionKind {
        match self {
            TestFunction::Indicator(_) => TestFunctionKind::Indicator,
            TestFunction::Bounded(_) => TestFunctionKind::Bounded,
        }
    }

    /// Evaluate the function; the result is expected to lie in `[0, 1]`.
    pub fn eval(&self, v: &Value) -> f64 {
        match self {
            TestFunction::Indicator(f) => {
                if f(v) {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Bounded(f) => {
                let y = f(v);
                debug_assert!((0.0..=1.0).contains(&y), "test function left [0, 1]: {y}");
                y
            }
        }
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::Indicator(_) => f.write_str("TestFunction::Indicator(..)"),
            TestFunction::Bounded(_) => f.write_str("TestFunction::Bounded(..)"),
        }
    }
}

/// Per-observation bias coefficient at a given premetric distance:
/// the distance itself for indicators, `2 sqrt(distance)` for general
/// bounded functions. Requires `distance` in `[0, 1]`.
pub fn bias_coefficient(kind: TestFunctionKind, distance: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&distance));
    match kind {
        TestFunctionKind::Indicator => distance,
        TestFunctionKind::Bounded => 2.0 * distance.sqrt(),
    }
}

/// Output of the simplex-projection weight optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalWeights {
    /// Number of strictly positive weights; always at least one.
    pub active: usize,
    /// Weights in the caller's original index order.
    pub weights: Vec<f64>,
    /// Original indices sorted by ascending bias (ties by original index).
    pub order: Vec<usize>,
}

/// Minimize `1/4 w'w + w'b` over the probability simplex.
///
/// Sorts the bias coefficients ascending (stable in the original index),
/// keeps the largest prefix `M` for which
/// `(1 + sum_{i<=M} 2 b_i) / M > 2 b_M`, and assigns
/// `w_j = -2 b_j + (1 + sum_{i<=M} 2 b_i) / M` to the kept entries.
pub fn optimal_weights(bias: &[f64]) -> Result<OptimalWeights> {
    if bias.is_empty() {
        return Err(Error::EmptyInput("optimal_weights requires at least one entry"));
    }
    for (i, &b) in bias.iter().enumerate() {
        if !b.is_finite() || b < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bias coefficient {i} is {b}, expected a finite value >= 0"
            )));
        }
    }
    let n = bias.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| bias[i].total_cmp(&bias[j]).then(i.cmp(&j)));

    // Scan prefixes, keeping the largest J whose shared level exceeds 2 b_J.
    // J = 1 always qualifies, so at least one observation is selected.
    let mut active = 1usize;
    let mut prefix = 2.0 * bias[order[0]];
    let mut active_sum = prefix;
    for j in 1..n {
        prefix += 2.0 * bias[order[j]];
        if (1.0 + prefix) / (j + 1) as f64 > 2.0 * bias[order[j]] {
            active = j + 1;
            active_sum = prefix;
        }
    }
    let level = (1.0 + active_sum) / active as f64;

    let mut weights = vec![0.0; n];
    for &i in order.iter().take(active) {
        weights[i] = level - 2.0 * bias[i];
    }
    Ok(OptimalWeights { active, weights, order })
}

/// Weight profile for one query covariate: bias coefficients and optimal
/// weights, computed from covariates alone.
#[derive(Debug, Clone)]
pub struct QueryWeights {
    pub bias: Vec<f64>,
    pub weights: Vec<f64>,
    /// Number of strictly positive weights.
    pub active: usize,
    /// Indices sorted by ascending bias.
    pub order: Vec<usize>,
}

/// Compute bias coefficients and optimal weights for a query covariate.
pub fn query_weights(
    covariates: &[Covariate],
    query: &Covariate,
    spec: &PremetricSpec,
    kind: TestFunctionKind,
) -> Result<QueryWeights> {
    if covariates.is_empty() {
        return Err(Error::EmptyInput("query_weights requires observations"));
    }
    let bias: Vec<f64> = covariates
        .iter()
        .map(|c| spec.eval(c, query).map(|d| bias_coefficient(kind, d)))
        .collect::<Result<_>>()?;
    let opt = optimal_weights(&bias)?;
    Ok(QueryWeights { bias, weights: opt.weights, active: opt.active, order: opt.order })
}

/// One weighted atom of a local empirical measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub weight: f64,
    pub value: Value,
}

/// A local empirical measure at a query covariate: weighted atoms at the
/// observed values, weights on the simplex, exactly `active` of them
/// strictly positive (the nearest in bias order).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalEmpiricalMeasure {
    pub query: Covariate,
    atoms: Vec<Atom>,
    active: usize,
}

impl LocalEmpiricalMeasure {
    /// Atoms in the original observation order, including zero-weight ones.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Number of atoms with strictly positive weight.
    pub fn active_count(&self) -> usize {
        self.active
    }

    pub fn nonzero_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| a.weight > 0.0)
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.weight)
    }

    /// Point estimate of the expectation of `h` under the latent measure at
    /// the query: `sum_t w_t h(X_t)`.
    pub fn estimate(&self, h: &TestFunction) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.weight > 0.0)
            .map(|a| a.weight * h.eval(&a.value))
            .sum()
    }
}

/// Build the local empirical measure at a query covariate. Deterministic in
/// the input order: ties in bias are broken by original index.
pub fn local_empirical_measure(
    data: &ObservationSet,
    query: &Covariate,
    spec: &PremetricSpec,
    h: &TestFunction,
) -> Result<LocalEmpiricalMeasure> {
    if data.is_empty() {
        return Err(Error::EmptyInput("local_empirical_measure requires observations"));
    }
    let qw = query_weights(data.covariates(), query, spec, h.kind())?;
    let atoms = qw
        .weights
        .iter()
        .zip(data.values())
        .map(|(&weight, value)| Atom { weight, value: value.clone() })
        .collect();
    Ok(LocalEmpiricalMeasure { query: query.clone(), atoms, active: qw.active })
}

/// The expected-squared-error bound `1/4 sum w^2 + sum w b`. This is also
/// the objective minimized by [`optimal_weights`].
pub fn squared_error_bound(weights: &[f64], bias: &[f64]) -> Result<f64> {
    if weights.len() != bias.len() {
        return Err(Error::DimensionMismatch { left: weights.len(), right: bias.len() });
    }
    let mut quad = 0.0;
    let mut lin = 0.0;
    for (&w, &b) in weights.iter().zip(bias) {
        quad += w * w;
        lin += w * b;
    }
    Ok(0.25 * quad + lin)
}

/// Number of epsilon grid points used to approach the tail-bound infimum.
const TAIL_GRID: usize = 101;
/// Relative margin keeping the grid strictly inside `(0, delta)`.
const TAIL_ENDPOINT_MARGIN: f64 = 1e-9;

/// Tail probability bound on `|estimate - truth| > delta`:
/// the minimum over a fixed epsilon grid in `(0, delta)` of
/// `2 exp(-2 eps^2 / sum w^2) + (delta - eps)^{-1} sum w b`,
/// clamped to `[0, 1]`. Any grid point is a valid upper bound, so the grid
/// approximation is conservative. When the bias term vanishes the grid's
/// upper endpoint `delta (1 - 1e-9)` recovers the plain concentration bound.
pub fn tail_bound(weights: &[f64], bias: &[f64], delta: f64) -> Result<f64> {
    if weights.len() != bias.len() {
        return Err(Error::DimensionMismatch { left: weights.len(), right: bias.len() });
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
    }
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    let bias_total: f64 = weights.iter().zip(bias).map(|(&w, &b)| w * b).sum();

    let lo = delta * TAIL_ENDPOINT_MARGIN;
    let hi = delta * (1.0 - TAIL_ENDPOINT_MARGIN);
    let mut best = f64::INFINITY;
    for i in 0..TAIL_GRID {
        let eps = lo + (hi - lo) * i as f64 / (TAIL_GRID - 1) as f64;
        let concentration = 2.0 * (-2.0 * eps * eps / sum_sq).exp();
        let smoothing = if bias_total == 0.0 { 0.0 } else { bias_total / (delta - eps) };
        best = best.min(concentration + smoothing);
    }
    Ok(best.clamp(0.0, 1.0))
}

/// Bisection tolerance for [`confidence_radius`].
const RADIUS_TOLERANCE: f64 = 1e-6;

/// Smallest radius `delta <= 1` whose tail bound is at most `alpha`, found
/// by bisection; `f64::INFINITY` when even `delta = 1` does not reach
/// `alpha` (for example when the bias term alone exceeds it).
pub fn confidence_radius(weights: &[f64], bias: &[f64], alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) || alpha == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    if tail_bound(weights, bias, 1.0)? > alpha {
        return Ok(f64::INFINITY);
    }
    // The tail bound is strictly decreasing in delta on the relative grid.
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > RADIUS_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if tail_bound(weights, bias, mid)? <= alpha {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
