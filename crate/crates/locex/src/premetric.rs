//! Premetrics over covariates.
//!
//! A premetric is a symmetric function `d` on covariate pairs with
//! `d(t, t) = 0` and range `[0, 1]`; no triangle inequality or positive
//! definiteness is required. The distance bounds how far the process is
//! from exchangeable when observations at the two covariates are swapped.
//!
//! The declarative family implemented here is a weighted sum of
//! per-coordinate terms capped at one: categorical coordinates flagged as
//! hard mismatches force distance 1 when their labels differ, and each
//! numeric coordinate contributes `weight * dist` where `dist` is the
//! absolute difference or its cyclic reduction. An explicit pairwise table
//! over a small covariate list is available as an escape hatch for
//! premetrics outside that family.

use serde::{Deserialize, Serialize};

use crate::covariate::Covariate;
use crate::error::{Error, Result};
use crate::partition::BlockPartition;

/// Distance used by one numeric coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NumericKind {
    /// `|a - b|`
    Absolute,
    /// `min(r, period - r)` with `r = (a - b) mod period`.
    Cyclic { period: f64 },
}

/// Weight and distance kind for one numeric coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericTerm {
    pub weight: f64,
    pub kind: NumericKind,
}

impl NumericTerm {
    pub fn absolute(weight: f64) -> Self {
        NumericTerm { weight, kind: NumericKind::Absolute }
    }

    pub fn cyclic(weight: f64, period: f64) -> Self {
        NumericTerm { weight, kind: NumericKind::Cyclic { period } }
    }

    fn distance(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            NumericKind::Absolute => (a - b).abs(),
            NumericKind::Cyclic { period } => {
                // Reduce |a - b| so the result is exactly symmetric in
                // floating point; min(r, p - r) is invariant to which
                // direction the gap is measured in.
                let r = (a - b).abs().rem_euclid(period);
                r.min(period - r)
            }
        }
    }
}

/// The weighted-sum-capped-at-one premetric family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpec {
    /// Hard-mismatch flag per categorical coordinate. A flagged coordinate
    /// whose labels differ forces distance 1; unflagged coordinates are
    /// ignored by the premetric.
    pub categorical: Vec<bool>,
    pub numeric: Vec<NumericTerm>,
}

/// An explicit distance table over an enumerated covariate list.
/// Construction checks shape only; the axioms (symmetry, zero diagonal,
/// range) are the caller's responsibility and can be checked with
/// [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub points: Vec<Covariate>,
    pub distances: Vec<Vec<f64>>,
}

/// A premetric over covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PremetricSpec {
    Weighted(WeightedSpec),
    Table(TableSpec),
}

impl PremetricSpec {
    /// Weighted spec; rejects negative or non-finite weights and
    /// non-positive periods at construction.
    pub fn weighted(categorical: Vec<bool>, numeric: Vec<NumericTerm>) -> Result<Self> {
        for (i, term) in numeric.iter().enumerate() {
            if !term.weight.is_finite() || term.weight < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "numeric term {i} has weight {}, expected a finite value >= 0",
                    term.weight
                )));
            }
            if let NumericKind::Cyclic { period } = term.kind {
                if !period.is_finite() || period <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "numeric term {i} has period {period}, expected > 0"
                    )));
                }
            }
        }
        Ok(PremetricSpec::Weighted(WeightedSpec { categorical, numeric }))
    }

    /// Premetric on a single numeric coordinate: `min(1, weight * |a - b|)`.
    pub fn scalar_absolute(weight: f64) -> Result<Self> {
        Self::weighted(Vec::new(), vec![NumericTerm::absolute(weight)])
    }

    /// Premetric on a single cyclic coordinate.
    pub fn scalar_cyclic(weight: f64, period: f64) -> Result<Self> {
        Self::weighted(Vec::new(), vec![NumericTerm::cyclic(weight, period)])
    }

    /// Escape hatch: an explicit pairwise table over a small covariate list.
    pub fn table(points: Vec<Covariate>, distances: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if distances.len() != n || distances.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidParameter(format!(
                "distance table must be {n}x{n} to match the point list"
            )));
        }
        Ok(PremetricSpec::Table(TableSpec { points, distances }))
    }

    /// Evaluate the premetric at a covariate pair.
    pub fn eval(&self, s: &Covariate, t: &Covariate) -> Result<f64> {
        match self {
            PremetricSpec::Weighted(w) => w.eval(s, t),
            PremetricSpec::Table(table) => table.eval(s, t),
        }
    }
}

impl WeightedSpec {
    fn check_schema(&self, c: &Covariate) -> Result<()> {
        if c.categorical.len() != self.categorical.len()
            || c.numeric.len() != self.numeric.len()
        {
            return Err(Error::SchemaMismatch(format!(
                "premetric expects {} categorical and {} numeric coordinates, \
                 covariate has {} and {}",
                self.categorical.len(),
                self.numeric.len(),
                c.categorical.len(),
                c.numeric.len()
            )));
        }
        Ok(())
    }

    fn eval(&self, s: &Covariate, t: &Covariate) -> Result<f64> {
        self.check_schema(s)?;
        self.check_schema(t)?;
        for (flag, (a, b)) in self
            .categorical
            .iter()
            .zip(s.categorical.iter().zip(t.categorical.iter()))
        {
            if *flag && a != b {
                return Ok(1.0);
            }
        }
        let mut total = 0.0;
        for (term, (&a, &b)) in self.numeric.iter().zip(s.numeric.iter().zip(t.numeric.iter()))
        {
            total += term.weight * term.distance(a, b);
        }
        Ok(total.min(1.0))
    }
}

impl TableSpec {
    fn index_of(&self, c: &Covariate) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p == c)
            .ok_or(Error::CovariateNotInTable)
    }

    fn eval(&self, s: &Covariate, t: &Covariate) -> Result<f64> {
        let i = self.index_of(s)?;
        let j = self.index_of(t)?;
        Ok(self.distances[i][j])
    }
}

/// One axiom violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    Asymmetric { i: usize, j: usize, forward: f64, backward: f64 },
    NonzeroDiagonal { i: usize, distance: f64 },
    OutOfRange { i: usize, j: usize, distance: f64 },
    EvalFailed { i: usize, j: usize, message: String },
}

/// Result of checking the premetric axioms over sampled covariate pairs.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checked_pairs: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check symmetry, zero self-distance, and range `[0, 1]` on every pair of
/// the sample (including each point against itself). Failures are collected
/// in the report rather than returned as errors.
pub fn validate(spec: &PremetricSpec, sample: &[Covariate]) -> Result<ValidationReport> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("validate requires a nonempty sample"));
    }
    let mut violations = Vec::new();
    let mut checked = 0usize;
    for i in 0..sample.len() {
        match spec.eval(&sample[i], &sample[i]) {
            Ok(d) if d != 0.0 => {
                violations.push(Violation::NonzeroDiagonal { i, distance: d })
            }
            Ok(_) => {}
            Err(e) => violations.push(Violation::EvalFailed { i, j: i, message: e.to_string() }),
        }
        checked += 1;
        for j in (i + 1)..sample.len() {
            checked += 1;
            let forward = match spec.eval(&sample[i], &sample[j]) {
                Ok(d) => d,
                Err(e) => {
                    violations.push(Violation::EvalFailed { i, j, message: e.to_string() });
                    continue;
                }
            };
            let backward = match spec.eval(&sample[j], &sample[i]) {
                Ok(d) => d,
                Err(e) => {
                    violations.push(Violation::EvalFailed { i, j, message: e.to_string() });
                    continue;
                }
            };
            if forward != backward {
                violations.push(Violation::Asymmetric { i, j, forward, backward });
            }
            if !(0.0..=1.0).contains(&forward) || !forward.is_finite() {
                violations.push(Violation::OutOfRange { i, j, distance: forward });
            }
        }
    }
    Ok(ValidationReport { checked_pairs: checked, violations })
}

/// Largest pairwise distance within a block of covariates; zero for a
/// singleton.
pub fn diameter(spec: &PremetricSpec, block: &[Covariate]) -> Result<f64> {
    if block.is_empty() {
        return Err(Error::EmptyInput("diameter requires a nonempty block"));
    }
    let mut max = 0.0f64;
    for i in 0..block.len() {
        for j in (i + 1)..block.len() {
            max = max.max(spec.eval(&block[i], &block[j])?);
        }
    }
    Ok(max)
}

/// How far binned empirical measures can be from sufficiency for the
/// underlying measure process, as a function of bin diameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SufficiencyDefect {
    /// `sum_k |T_k| * diam(T_k)`
    pub blockwise: f64,
    /// `|T| * max_k diam(T_k)` — coarser, but needs only the worst bin.
    pub global: f64,
}

/// Evaluate both sufficiency-defect bounds for a partition of the
/// covariates into bins.
pub fn sufficiency_defect_bound(
    spec: &PremetricSpec,
    partition: &BlockPartition,
    covariates: &[Covariate],
) -> Result<SufficiencyDefect> {
    if partition.len() != covariates.len() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} indices but there are {} covariates",
            partition.len(),
            covariates.len()
        )));
    }
    let mut blockwise = 0.0;
    let mut max_diam = 0.0f64;
    for block in partition.blocks() {
        let members: Vec<Covariate> =
            block.iter().map(|&i| covariates[i].clone()).collect();
        let d = diameter(spec, &members)?;
        blockwise += block.len() as f64 * d;
        max_diam = max_diam.max(d);
    }
    Ok(SufficiencyDefect { blockwise, global: covariates.len() as f64 * max_diam })
}
