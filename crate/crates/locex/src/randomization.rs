//! Local randomization tests with exact type-1 error control.
//!
//! The null hypothesis is that the observed process is locally exchangeable
//! with respect to a given premetric. The test permutes observation values
//! within the blocks of a partition (covariate labels stay fixed), compares
//! the observed statistic against its permuted versions, and subtracts a
//! local exchangeability penalty from the exceedance fraction before
//! thresholding. With the penalty in place the type-1 error is at most
//! `alpha` exactly — no asymptotics.
//!
//! Two execution paths are provided: full enumeration of the within-block
//! permutation group (up to an enumeration budget) and subsampling with `N`
//! uniform group draws, which keeps exactness by lowering the effective
//! level to `alpha_N`.

use std::sync::Arc;

use serde::ser::Serializer;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::covariate::Covariate;
use crate::data::{ObservationSet, Value};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::partition::BlockPartition;
use crate::premetric::PremetricSpec;
use crate::rng;

/// Largest permutation group order the exact test will enumerate.
pub const ENUMERATION_BUDGET: u64 = 1_000_000;

/// A test statistic over the full labeled sample.
#[derive(Clone)]
pub enum TestStatistic {
    /// Difference of conditional outcome proportions between two groups:
    /// `#(outcome & treated) / #treated - #(outcome & control) / #control`.
    /// Group membership is attached to the observation index and stays fixed
    /// under permutation; the outcome is read from the (permuted) value.
    DiffConditionalProportions {
        group: Vec<bool>,
        outcome: Arc<dyn Fn(&Value) -> bool + Send + Sync>,
    },
    /// Arbitrary statistic of the values in index order.
    Custom(Arc<dyn Fn(&[Value]) -> f64 + Send + Sync>),
}

impl TestStatistic {
    pub fn diff_conditional_proportions(
        group: Vec<bool>,
        outcome: impl Fn(&Value) -> bool + Send + Sync + 'static,
    ) -> Self {
        TestStatistic::DiffConditionalProportions { group, outcome: Arc::new(outcome) }
    }

    pub fn custom(f: impl Fn(&[Value]) -> f64 + Send + Sync + 'static) -> Self {
        TestStatistic::Custom(Arc::new(f))
    }
}

impl std::fmt::Debug for TestStatistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestStatistic::DiffConditionalProportions { group, .. } => f
                .debug_struct("DiffConditionalProportions")
                .field("group_len", &group.len())
                .finish(),
            TestStatistic::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Difference of conditional outcome proportions between two labeled groups.
pub fn diff_conditional_proportions(group: &[bool], outcome: &[bool]) -> Result<f64> {
    if group.len() != outcome.len() {
        return Err(Error::DimensionMismatch { left: group.len(), right: outcome.len() });
    }
    let n_treated = group.iter().filter(|&&g| g).count();
    let n_control = group.len() - n_treated;
    if n_treated == 0 {
        return Err(Error::EmptyGroup("no treated records"));
    }
    if n_control == 0 {
        return Err(Error::EmptyGroup("no control records"));
    }
    let mut hit_treated = 0usize;
    let mut hit_control = 0usize;
    for (&g, &o) in group.iter().zip(outcome) {
        if o {
            if g {
                hit_treated += 1;
            } else {
                hit_control += 1;
            }
        }
    }
    Ok(hit_treated as f64 / n_treated as f64 - hit_control as f64 / n_control as f64)
}

/// Statistic prepared for repeated evaluation under permutations.
enum CompiledStatistic<'a> {
    Diff { group: &'a [bool], outcome: Vec<bool>, n_treated: usize, n_control: usize },
    Custom { f: &'a (dyn Fn(&[Value]) -> f64 + Send + Sync), values: &'a [Value], scratch: Vec<Value> },
}

impl<'a> CompiledStatistic<'a> {
    fn compile(stat: &'a TestStatistic, values: &'a [Value]) -> Result<Self> {
        match stat {
            TestStatistic::DiffConditionalProportions { group, outcome } => {
                if group.len() != values.len() {
                    return Err(Error::DimensionMismatch {
                        left: group.len(),
                        right: values.len(),
                    });
                }
                let n_treated = group.iter().filter(|&&g| g).count();
                let n_control = group.len() - n_treated;
                if n_treated == 0 {
                    return Err(Error::EmptyGroup("no treated records"));
                }
                if n_control == 0 {
                    return Err(Error::EmptyGroup("no control records"));
                }
                let outcome_flags = values.iter().map(|v| outcome(v)).collect();
                Ok(CompiledStatistic::Diff {
                    group,
                    outcome: outcome_flags,
                    n_treated,
                    n_control,
                })
            }
            TestStatistic::Custom(f) => Ok(CompiledStatistic::Custom {
                f: f.as_ref(),
                values,
                scratch: values.to_vec(),
            }),
        }
    }

    fn observed(&mut self) -> f64 {
        match self {
            CompiledStatistic::Diff { group, outcome, n_treated, n_control } => {
                diff_from_flags(group, |i| outcome[i], *n_treated, *n_control)
            }
            CompiledStatistic::Custom { f, values, .. } => f(values),
        }
    }

    /// Statistic of the permuted process: index `i` takes value `perm[i]`.
    fn permuted(&mut self, perm: &[usize]) -> f64 {
        match self {
            CompiledStatistic::Diff { group, outcome, n_treated, n_control } => {
                diff_from_flags(group, |i| outcome[perm[i]], *n_treated, *n_control)
            }
            CompiledStatistic::Custom { f, values, scratch } => {
                for (slot, &src) in scratch.iter_mut().zip(perm) {
                    slot.clone_from(&values[src]);
                }
                f(scratch)
            }
        }
    }
}

fn diff_from_flags(
    group: &[bool],
    outcome_at: impl Fn(usize) -> bool,
    n_treated: usize,
    n_control: usize,
) -> f64 {
    let mut hit_treated = 0usize;
    let mut hit_control = 0usize;
    for (i, &g) in group.iter().enumerate() {
        if outcome_at(i) {
            if g {
                hit_treated += 1;
            } else {
                hit_control += 1;
            }
        }
    }
    hit_treated as f64 / n_treated as f64 - hit_control as f64 / n_control as f64
}

/// Outcome of a local randomization test.
#[derive(Debug, Clone, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    /// Fraction of group elements whose permuted statistic falls strictly
    /// below the observed one.
    pub frac_exceed: f64,
    /// Local exchangeability penalty subtracted from the fraction: the exact
    /// group average for the enumerated test, the Monte Carlo average of the
    /// drawn permutations for the subsampled test.
    pub penalty: f64,
    /// Rejection threshold: `1 - alpha` (exact) or `1 - alpha_N` (subsampled).
    pub threshold: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_n: Option<f64>,
    /// `frac_exceed - penalty > threshold`
    pub reject: bool,
    pub n_samples: SampleCount,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Block index lists of the permutation group, for exact replay.
    pub partition: Vec<Vec<usize>>,
    /// Hash of the serialized premetric, for exact replay.
    pub premetric_hash: String,
}

/// Number of permutations examined: the whole group, or a sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleCount {
    Exact,
    Sampled(u64),
}

impl Serialize for SampleCount {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SampleCount::Exact => serializer.serialize_str("exact"),
            SampleCount::Sampled(n) => serializer.serialize_u64(*n),
        }
    }
}

/// Hex SHA-256 of the canonical serialization of a premetric.
pub fn premetric_hash(spec: &PremetricSpec) -> String {
    let bytes = serde_json::to_vec(spec).expect("premetric specs always serialize");
    let digest = Sha256::digest(&bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Pairwise distances within each block of a partition.
struct BlockDistances {
    /// Sorted member list per block, shared with the partition.
    members: Vec<Vec<usize>>,
    /// Distance matrix per block in member order.
    matrices: Vec<Vec<Vec<f64>>>,
}

impl BlockDistances {
    fn build(
        partition: &BlockPartition,
        spec: &PremetricSpec,
        covariates: &[Covariate],
    ) -> Result<Self> {
        if partition.len() != covariates.len() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} indices but there are {} covariates",
                partition.len(),
                covariates.len()
            )));
        }
        let mut members = Vec::with_capacity(partition.n_blocks());
        let mut matrices = Vec::with_capacity(partition.n_blocks());
        for block in partition.blocks() {
            let b = block.len();
            let mut m = vec![vec![0.0; b]; b];
            for i in 0..b {
                for j in (i + 1)..b {
                    let d = spec.eval(&covariates[block[i]], &covariates[block[j]])?;
                    m[i][j] = d;
                    m[j][i] = d;
                }
            }
            members.push(block.clone());
            matrices.push(m);
        }
        Ok(BlockDistances { members, matrices })
    }

    /// `sum_t d(t, perm(t))` for a within-block permutation.
    fn permutation_penalty(&self, perm: &[usize]) -> f64 {
        let mut total = 0.0;
        for (members, matrix) in self.members.iter().zip(&self.matrices) {
            for (local, &global) in members.iter().enumerate() {
                let image = perm[global];
                if image != global {
                    let local_image = members
                        .binary_search(&image)
                        .expect("within-block permutation leaves its block");
                    total += matrix[local][local_image];
                }
            }
        }
        total
    }
}

/// Group average of `sum_t d(t, pi(t))` over the within-block permutation
/// group. Under a uniform within-block permutation the image of each index
/// is uniform over its block, so the average collapses to
/// `sum_k (1/|T_k|) sum_{t, t' in T_k} d(t, t')`.
pub fn penalty(
    partition: &BlockPartition,
    spec: &PremetricSpec,
    covariates: &[Covariate],
) -> Result<f64> {
    let dists = BlockDistances::build(partition, spec, covariates)?;
    let mut total = 0.0;
    for (members, matrix) in dists.members.iter().zip(&dists.matrices) {
        let b = members.len();
        let mut block_sum = 0.0;
        for i in 0..b {
            for j in (i + 1)..b {
                block_sum += 2.0 * matrix[i][j];
            }
        }
        total += block_sum / b as f64;
    }
    Ok(total)
}

/// Group maximum of `sum_t d(t, pi(t))`, floored at one. The maximum is
/// computed exactly as a maximum-weight assignment within each block; the
/// per-index bound `sum_t max_t' d(t, t')` is not attained by a permutation
/// in general, and the subsampled level correction needs the true maximum.
pub fn group_max(
    partition: &BlockPartition,
    spec: &PremetricSpec,
    covariates: &[Covariate],
) -> Result<f64> {
    let dists = BlockDistances::build(partition, spec, covariates)?;
    let mut total = 0.0;
    for matrix in &dists.matrices {
        if matrix.len() >= 2 {
            total += max_assignment(matrix);
        }
    }
    Ok(total.max(1.0))
}

/// Maximum over permutations of `sum_i m[i][pi(i)]` (assignment problem).
fn max_assignment(matrix: &[Vec<f64>]) -> f64 {
    let negated: Vec<Vec<f64>> =
        matrix.iter().map(|row| row.iter().map(|&d| -d).collect()).collect();
    -min_assignment(&negated)
}

/// Minimum-cost assignment via the Hungarian algorithm with potentials,
/// O(n^3). One-indexed internal arrays; column 0 is the virtual start.
fn min_assignment(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    if n == 0 {
        return 0.0;
    }
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < min_slack[j] {
                        min_slack[j] = cur;
                        way[j] = j0;
                    }
                    if min_slack[j] < delta {
                        delta = min_slack[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[row_of[j] - 1][j - 1]).sum()
}

/// Admissibility predicate for partition blocks during greedy merging.
#[derive(Clone)]
pub enum BlockConstraint {
    /// All merges allowed.
    None,
    /// Blocks may not exceed the given size.
    MaxSize(usize),
    /// At most one flagged and one unflagged index per block; yields
    /// matched pairs when the flags are treatment labels.
    MatchedPair { group: Vec<bool> },
    /// Arbitrary predicate on the merged member list. Must accept all
    /// singletons.
    Custom(Arc<dyn Fn(&[usize]) -> bool + Send + Sync>),
}

impl BlockConstraint {
    fn admits(&self, members: &[usize]) -> bool {
        match self {
            BlockConstraint::None => true,
            BlockConstraint::MaxSize(limit) => members.len() <= *limit,
            BlockConstraint::MatchedPair { group } => {
                let flagged = members.iter().filter(|&&i| group[i]).count();
                flagged <= 1 && members.len() - flagged <= 1
            }
            BlockConstraint::Custom(f) => f(members),
        }
    }
}

impl std::fmt::Debug for BlockConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockConstraint::None => f.write_str("None"),
            BlockConstraint::MaxSize(k) => write!(f, "MaxSize({k})"),
            BlockConstraint::MatchedPair { .. } => f.write_str("MatchedPair"),
            BlockConstraint::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Greedy construction of the permutation group: starting from singletons,
/// repeatedly merge the admissible pair of blocks that minimizes the
/// resulting penalty, stopping when the best merge would push the penalty
/// past `alpha / 2`. Ties are broken toward the lexicographically smallest
/// block-index pair. The returned partition always has penalty at most
/// `alpha / 2`.
pub fn build_partition(
    covariates: &[Covariate],
    spec: &PremetricSpec,
    alpha: f64,
    constraint: &BlockConstraint,
) -> Result<BlockPartition> {
    if covariates.is_empty() {
        return Err(Error::EmptyInput("build_partition requires covariates"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    let n = covariates.len();
    if let BlockConstraint::MatchedPair { group } = constraint {
        if group.len() != n {
            return Err(Error::DimensionMismatch { left: group.len(), right: n });
        }
    }
    let budget = alpha / 2.0;

    let mut distance = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = spec.eval(&covariates[i], &covariates[j])?;
            distance[i][j] = d;
            distance[j][i] = d;
        }
    }

    let mut blocks: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    // Ordered-pair distance sum per block, and the block's penalty share.
    let mut pair_sums = vec![0.0f64; n];
    let mut shares = vec![0.0f64; n];
    let mut total = 0.0f64;

    while blocks.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for k in 0..blocks.len() {
            for k2 in (k + 1)..blocks.len() {
                let merged_len = blocks[k].len() + blocks[k2].len();
                let mut merged = Vec::with_capacity(merged_len);
                merged.extend_from_slice(&blocks[k]);
                merged.extend_from_slice(&blocks[k2]);
                merged.sort_unstable();
                if !constraint.admits(&merged) {
                    continue;
                }
                let mut cross = 0.0;
                for &i in &blocks[k] {
                    for &j in &blocks[k2] {
                        cross += distance[i][j];
                    }
                }
                let merged_sum = pair_sums[k] + pair_sums[k2] + 2.0 * cross;
                let candidate =
                    total - shares[k] - shares[k2] + merged_sum / merged_len as f64;
                if best.map_or(true, |(b, _, _)| candidate < b) {
                    best = Some((candidate, k, k2));
                }
            }
        }
        let Some((candidate, k, k2)) = best else {
            break;
        };
        if candidate > budget {
            break;
        }
        let absorbed = blocks.remove(k2);
        let absorbed_sum = pair_sums.remove(k2);
        shares.remove(k2);
        let mut cross = 0.0;
        for &i in &blocks[k] {
            for &j in &absorbed {
                cross += distance[i][j];
            }
        }
        blocks[k].extend(absorbed);
        blocks[k].sort_unstable();
        pair_sums[k] += absorbed_sum + 2.0 * cross;
        shares[k] = pair_sums[k] / blocks[k].len() as f64;
        total = candidate;
    }

    BlockPartition::new(blocks, n)
}

/// Uniform draw from the within-block permutation group: an independent
/// Fisher-Yates shuffle inside each block, identity across blocks.
pub fn sample_within_bin_permutation(
    partition: &BlockPartition,
    rng: &mut impl rand::Rng,
) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut perm: Vec<usize> = (0..partition.len()).collect();
    let mut scratch = Vec::new();
    for block in partition.blocks() {
        if block.len() < 2 {
            continue;
        }
        scratch.clear();
        scratch.extend_from_slice(block);
        scratch.shuffle(rng);
        for (pos, &target) in scratch.iter().enumerate() {
            perm[block[pos]] = target;
        }
    }
    perm
}

/// All orderings of a member list, in a fixed recursive order starting from
/// the list itself.
fn orderings(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in orderings(&rest) {
            let mut perm = Vec::with_capacity(items.len());
            perm.push(head);
            perm.append(&mut tail);
            out.push(perm);
        }
    }
    out
}

/// Visit every element of the within-block permutation group exactly once.
fn for_each_group_permutation(
    partition: &BlockPartition,
    mut visit: impl FnMut(&[usize]),
) {
    let blocks = partition.blocks();
    let block_orderings: Vec<Vec<Vec<usize>>> =
        blocks.iter().map(|b| orderings(b)).collect();
    let mut perm: Vec<usize> = (0..partition.len()).collect();
    let mut odometer = vec![0usize; blocks.len()];
    loop {
        for (k, block) in blocks.iter().enumerate() {
            let arrangement = &block_orderings[k][odometer[k]];
            for (pos, &target) in arrangement.iter().enumerate() {
                perm[block[pos]] = target;
            }
        }
        visit(&perm);
        // Advance the odometer.
        let mut k = 0;
        loop {
            if k == odometer.len() {
                return;
            }
            odometer[k] += 1;
            if odometer[k] < block_orderings[k].len() {
                break;
            }
            odometer[k] = 0;
            k += 1;
        }
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// Randomization test by full enumeration of the within-block permutation
/// group. Rejects when the fraction of permutations with strictly smaller
/// statistic, minus the exact group-average penalty, exceeds `1 - alpha`.
/// Errors when the group order exceeds [`ENUMERATION_BUDGET`].
pub fn exact_test(
    data: &ObservationSet,
    partition: &BlockPartition,
    spec: &PremetricSpec,
    stat: &TestStatistic,
    alpha: f64,
) -> Result<TestResult> {
    validate_alpha(alpha)?;
    if data.is_empty() {
        return Err(Error::EmptyInput("exact_test requires observations"));
    }
    let order = partition
        .group_order_capped(ENUMERATION_BUDGET)
        .ok_or(Error::EnumerationBudget { budget: ENUMERATION_BUDGET })?;
    let pen = penalty(partition, spec, data.covariates())?;
    let mut compiled = CompiledStatistic::compile(stat, data.values())?;
    let observed = compiled.observed();

    let mut exceed: u64 = 0;
    for_each_group_permutation(partition, |perm| {
        if observed > compiled.permuted(perm) {
            exceed += 1;
        }
    });

    let frac_exceed = exceed as f64 / order as f64;
    let threshold = 1.0 - alpha;
    Ok(TestResult {
        statistic: observed,
        frac_exceed,
        penalty: pen,
        threshold,
        alpha,
        alpha_n: None,
        reject: frac_exceed - pen > threshold,
        n_samples: SampleCount::Exact,
        seed: None,
        partition: partition.blocks().to_vec(),
        premetric_hash: premetric_hash(spec),
    })
}

/// Effective level of the subsampled test with `n` Monte Carlo draws:
/// `alpha - 2 sqrt(|log(2n / m^2)| / (2n / m^2))`. May be non-positive, in
/// which case the test cannot reject and more samples are needed.
pub fn alpha_n(alpha: f64, m: f64, n: u64) -> f64 {
    let x = 2.0 * n as f64 / (m * m);
    alpha - 2.0 * (x.ln().abs() / x).sqrt()
}

/// Smallest sample count on the eventually-monotone tail for which
/// `alpha_n` is positive, by doubling then integer bisection. The tail
/// starts at `x = 2N/m^2 = e`, past the maximum of the correction term.
pub fn required_samples(alpha: f64, m: f64) -> Result<u64> {
    validate_alpha(alpha)?;
    if !m.is_finite() || m < 1.0 {
        return Err(Error::InvalidParameter(format!("m must be >= 1, got {m}")));
    }
    let tail_start = ((std::f64::consts::E * m * m / 2.0).ceil() as u64).max(1);
    // The correction at the tail start is about 1.21, above any alpha < 1.
    let mut lo = tail_start;
    let mut hi = tail_start.max(1);
    while alpha_n(alpha, m, hi) <= 0.0 {
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if alpha_n(alpha, m, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Subsampled randomization test with `n_samples` uniform group draws from
/// seed-derived substreams. Rejects when the average of
/// `indicator - per-draw penalty` exceeds `1 - alpha_N`. Exact in level:
/// the type-1 error stays at most `alpha`. Errors when `alpha_N <= 0`,
/// reporting the sample count that would make it positive.
pub fn subsampled_test(
    data: &ObservationSet,
    partition: &BlockPartition,
    spec: &PremetricSpec,
    stat: &TestStatistic,
    alpha: f64,
    n_samples: u64,
    seed: u64,
) -> Result<TestResult> {
    validate_alpha(alpha)?;
    if data.is_empty() {
        return Err(Error::EmptyInput("subsampled_test requires observations"));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    let m = group_max(partition, spec, data.covariates())?;
    let level = alpha_n(alpha, m, n_samples);
    if level <= 0.0 {
        return Err(Error::InsufficientSamples {
            alpha_n: level,
            n: n_samples,
            required: required_samples(alpha, m)?,
        });
    }
    let dists = BlockDistances::build(partition, spec, data.covariates())?;
    let mut compiled = CompiledStatistic::compile(stat, data.values())?;
    let observed = compiled.observed();

    // Indicators accumulate exactly as an integer count; penalties use a
    // compensated sum in draw order. Each draw has its own substream, so the
    // result does not depend on evaluation order.
    let mut exceed: u64 = 0;
    let mut penalty_sum = CompensatedSum::new();
    for draw in 0..n_samples {
        let mut draw_rng = rng::substream(seed, draw);
        let perm = sample_within_bin_permutation(partition, &mut draw_rng);
        if observed > compiled.permuted(&perm) {
            exceed += 1;
        }
        penalty_sum.add(dists.permutation_penalty(&perm));
    }

    let frac_exceed = exceed as f64 / n_samples as f64;
    let mean_penalty = penalty_sum.value() / n_samples as f64;
    let threshold = 1.0 - level;
    Ok(TestResult {
        statistic: observed,
        frac_exceed,
        penalty: mean_penalty,
        threshold,
        alpha,
        alpha_n: Some(level),
        reject: frac_exceed - mean_penalty > threshold,
        n_samples: SampleCount::Sampled(n_samples),
        seed: Some(seed),
        partition: partition.blocks().to_vec(),
        premetric_hash: premetric_hash(spec),
    })
}
