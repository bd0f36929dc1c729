//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured quantities. Monte Carlo criteria use fixed seeds and the
//! stated tolerances. Tests share a lock so wall-clock measurements are not
//! perturbed by parallel test threads.

use std::collections::BTreeMap;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use locex::covariate::Covariate;
use locex::data::Value;
use locex::dsc::{estimate_dsc, Alphabet, RealizationBundle};
use locex::empirical::{
    confidence_radius, local_empirical_measure, optimal_weights, query_weights,
    squared_error_bound, tail_bound, OptimalWeights, TestFunction, TestFunctionKind,
};
use locex::generators::{self, GeneratorKind, GeneratorSpec, Quantizer};
use locex::partition::BlockPartition;
use locex::premetric::PremetricSpec;
use locex::randomization::{
    alpha_n, build_partition, exact_test, group_max, penalty, required_samples,
    subsampled_test, BlockConstraint, TestStatistic,
};
use locex::rng;

use rand::seq::index::sample as sample_indices;
use rand::Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn unit_grid(n: usize) -> Vec<Covariate> {
    (0..n)
        .map(|i| Covariate::scalar(i as f64 / (n - 1) as f64))
        .collect()
}

fn symbol_is(label: &'static str) -> impl Fn(&Value) -> bool {
    move |v| *v == Value::Symbol(label.to_string())
}

// --- criterion 1 -----------------------------------------------------------

/// Continuous minimum of `1/4 sum w^2 + sum w b` over `w >= 0` with
/// `sum w = mass`, for an ascending bias slice. Used both as the exact
/// branch-and-bound relaxation and as an independent route to the optimum.
fn suffix_relaxation(sorted_bias: &[f64], mass: f64) -> f64 {
    if sorted_bias.is_empty() || mass <= 0.0 {
        return 0.0;
    }
    let mut active = 0usize;
    let mut prefix = 0.0;
    let mut level = 0.0;
    for (j, &b) in sorted_bias.iter().enumerate() {
        let candidate_prefix = prefix + 2.0 * b;
        let candidate_level = (mass + candidate_prefix) / (2.0 * (j + 1) as f64);
        if candidate_level > b {
            active = j + 1;
            prefix = candidate_prefix;
            level = candidate_level;
        } else {
            break;
        }
    }
    sorted_bias[..active].iter().map(|&b| level * level - b * b).sum()
}

/// Search the resolution-`res` simplex lattice for a point with objective
/// strictly below `threshold`. Pruned subtrees provably contain no such
/// point (the pruning bound is the exact continuous relaxation), so a
/// `None` result certifies the whole lattice.
fn lattice_point_below(
    sorted_bias: &[f64],
    res: usize,
    threshold: f64,
) -> Option<(Vec<usize>, f64)> {
    fn recurse(
        bias: &[f64],
        j: usize,
        units_left: usize,
        res: f64,
        partial: f64,
        threshold: f64,
        picks: &mut Vec<usize>,
    ) -> Option<(Vec<usize>, f64)> {
        if j == bias.len() - 1 {
            let w = units_left as f64 / res;
            let total = partial + 0.25 * w * w + w * bias[j];
            if total < threshold {
                let mut full = picks.clone();
                full.push(units_left);
                return Some((full, total));
            }
            return None;
        }
        for k in 0..=units_left {
            let w = k as f64 / res;
            let with_k = partial + 0.25 * w * w + w * bias[j];
            let relax = suffix_relaxation(&bias[j + 1..], (units_left - k) as f64 / res);
            if with_k + relax >= threshold {
                continue;
            }
            picks.push(k);
            if let Some(hit) =
                recurse(bias, j + 1, units_left - k, res, with_k, threshold, picks)
            {
                return Some(hit);
            }
            picks.pop();
        }
        None
    }
    recurse(sorted_bias, 0, res, res as f64, 0.0, threshold, &mut Vec::new())
}

fn kkt_satisfied(bias: &[f64], out: &OptimalWeights) -> bool {
    let first = out.order[0];
    let multiplier = 0.5 * out.weights[first] + bias[first];
    let mut ok = true;
    for (rank, &i) in out.order.iter().enumerate() {
        if rank < out.active {
            ok &= out.weights[i] > 0.0;
            ok &= (0.5 * out.weights[i] + bias[i] - multiplier).abs() <= 1e-12;
        } else {
            ok &= out.weights[i] == 0.0;
            ok &= bias[i] >= multiplier - 1e-12;
        }
    }
    let total: f64 = out.weights.iter().sum();
    ok && (total - 1.0).abs() <= 1e-9
}

#[test]
fn criterion_1_weight_optimizer_oracle() {
    let _guard = serial();
    let start = Instant::now();
    let resolution = 200;
    let mut rng = rng::stream(101);
    for case in 0..200 {
        let len = rng.random_range(1..=6);
        let bias: Vec<f64> = (0..len).map(|_| rng.random::<f64>() * 2.0).collect();
        let out = optimal_weights(&bias).unwrap();
        let objective = squared_error_bound(&out.weights, &bias).unwrap();

        assert!(kkt_satisfied(&bias, &out), "KKT failed on case {case}: {bias:?}");

        let mut sorted = bias.clone();
        sorted.sort_by(f64::total_cmp);
        // Independent closed-form route must agree with the optimizer.
        let relaxed = suffix_relaxation(&sorted, 1.0);
        assert!(
            (relaxed - objective).abs() <= 1e-12,
            "relaxation {relaxed} vs optimizer {objective} on case {case}"
        );

        // No lattice point beats the closed form by more than 1e-8.
        if let Some((picks, value)) =
            lattice_point_below(&sorted, resolution, objective - 1e-8)
        {
            panic!(
                "case {case}: lattice point {picks:?} has objective {value} < {objective} - 1e-8"
            );
        }
        // Sanity on the searcher itself: with a generous threshold it finds
        // a point (the lattice is never empty).
        assert!(lattice_point_below(&sorted, resolution, objective + 0.5).is_some());
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 1 (weight-optimizer oracle): PASS — 200 cases, KKT exact, \
         grid search certified at 1/{resolution}, {elapsed:?}"
    );
}

// --- criterion 2 -----------------------------------------------------------

#[test]
fn criterion_2_hand_case() {
    let _guard = serial();
    let bias = [0.0, 0.1, 0.5];
    let out = optimal_weights(&bias).unwrap();
    assert_eq!(out.active, 2);
    assert!((out.weights[0] - 0.6).abs() <= 1e-12);
    assert!((out.weights[1] - 0.4).abs() <= 1e-12);
    assert_eq!(out.weights[2], 0.0);
    let bound = squared_error_bound(&out.weights, &bias).unwrap();
    assert!((bound - 0.17).abs() <= 1e-12);
    println!(
        "criterion 2 (hand case b=[0,0.1,0.5]): PASS — M=2, weights=({}, {}, {}), bound={bound}",
        out.weights[0], out.weights[1], out.weights[2]
    );
}

// --- criterion 3 -----------------------------------------------------------

#[test]
fn criterion_3_bound_validity() {
    let _guard = serial();
    let start = Instant::now();
    let covariates = unit_grid(30);
    let spec = PremetricSpec::scalar_absolute(1.0).unwrap();
    let queries = [0.1, 0.3, 0.5, 0.7, 0.9];
    let deltas = [0.2, 0.3, 0.5];
    let realizations: u64 = 2000;
    let master = 30_003;

    struct QueryState {
        tau: f64,
        weights: Vec<f64>,
        sq_bound: f64,
        tail_bounds: [f64; 3],
        sum_sq_err: f64,
        sum_quad_err: f64,
        tail_hits: [u64; 3],
    }

    let mut states: Vec<QueryState> = queries
        .iter()
        .map(|&tau| {
            let qw = query_weights(
                &covariates,
                &Covariate::scalar(tau),
                &spec,
                TestFunctionKind::Indicator,
            )
            .unwrap();
            let sq_bound = squared_error_bound(&qw.weights, &qw.bias).unwrap();
            let tail_bounds = [
                tail_bound(&qw.weights, &qw.bias, deltas[0]).unwrap(),
                tail_bound(&qw.weights, &qw.bias, deltas[1]).unwrap(),
                tail_bound(&qw.weights, &qw.bias, deltas[2]).unwrap(),
            ];
            QueryState {
                tau,
                weights: qw.weights,
                sq_bound,
                tail_bounds,
                sum_sq_err: 0.0,
                sum_quad_err: 0.0,
                tail_hits: [0; 3],
            }
        })
        .collect();

    for r in 0..realizations {
        let (obs, threshold) =
            generators::gen_jump_with_latent(&covariates, rng::derive(master, r)).unwrap();
        let one_flags: Vec<f64> = obs
            .values()
            .iter()
            .map(|v| if *v == Value::symbol("1") { 1.0 } else { 0.0 })
            .collect();
        for state in &mut states {
            let estimate: f64 = state
                .weights
                .iter()
                .zip(&one_flags)
                .map(|(&w, &h)| w * h)
                .sum();
            let truth = if state.tau >= threshold { 1.0 } else { 0.0 };
            let err = estimate - truth;
            state.sum_sq_err += err * err;
            state.sum_quad_err += err * err * err * err;
            for (slot, &delta) in deltas.iter().enumerate() {
                if err.abs() > delta {
                    state.tail_hits[slot] += 1;
                }
            }
        }
    }

    let n = realizations as f64;
    for state in &states {
        let mse = state.sum_sq_err / n;
        let var_sq = (state.sum_quad_err / n - mse * mse).max(0.0);
        let se = (var_sq / n).sqrt();
        assert!(
            mse <= state.sq_bound + 3.0 * se,
            "query {}: mse {mse} exceeds bound {} + 3*{se}",
            state.tau,
            state.sq_bound
        );
        for (slot, &delta) in deltas.iter().enumerate() {
            let p_hat = state.tail_hits[slot] as f64 / n;
            let sigma = (p_hat * (1.0 - p_hat) / n).sqrt();
            assert!(
                p_hat <= state.tail_bounds[slot] + 3.0 * sigma,
                "query {} delta {delta}: empirical {p_hat} exceeds bound {} + 3*{sigma}",
                state.tau,
                state.tail_bounds[slot]
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    let worst = states
        .iter()
        .map(|s| s.sum_sq_err / n / s.sq_bound)
        .fold(0.0f64, f64::max);
    println!(
        "criterion 3 (estimation error bounds): PASS — 5 queries x 2000 realizations, \
         worst mse/bound ratio {worst:.3}, {elapsed:?}"
    );
}

// --- criterion 4 -----------------------------------------------------------

#[test]
fn criterion_4_exact_test_type1() {
    let _guard = serial();
    let start = Instant::now();
    let n = 8usize;
    let covariates: Vec<Covariate> = (0..n).map(|i| Covariate::scalar(i as f64)).collect();
    let group: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    let partition =
        BlockPartition::new((0..4).map(|k| vec![2 * k, 2 * k + 1]).collect(), n).unwrap();
    let spec = PremetricSpec::scalar_absolute(0.0).unwrap();
    let alpha = 0.05;
    let trials: u64 = 2000;

    let mut rejections = 0u64;
    for trial in 0..trials {
        let data =
            generators::gen_iid(&[0.5, 0.5], &covariates, rng::derive(40_004, trial))
                .unwrap();
        let stat =
            TestStatistic::diff_conditional_proportions(group.clone(), symbol_is("1"));
        if exact_test(&data, &partition, &spec, &stat, alpha).unwrap().reject {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / trials as f64;
    let limit = alpha + 3.0 * (alpha * (1.0 - alpha) / trials as f64).sqrt();
    assert!(rate <= limit, "rejection rate {rate} exceeds {limit}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "criterion 4 (exact test type-1): PASS — rate {rate:.4} <= {limit:.4} \
         over {trials} datasets, {elapsed:?}"
    );
}

// --- criterion 5 -----------------------------------------------------------

#[test]
fn criterion_5_subsampled_test_type1() {
    let _guard = serial();
    let start = Instant::now();

    let reference = alpha_n(0.05, 1.0, 100_000);
    assert!(
        (reference - 0.034376).abs() <= 1e-6,
        "alpha_N(0.05, 1, 100000) = {reference}"
    );

    // Null data: jump process with its matching premetric; matched pairs of
    // nearby covariates built by the greedy group construction.
    let n = 12usize;
    let covariates: Vec<Covariate> =
        (0..n).map(|i| Covariate::scalar(0.3 + 0.004 * i as f64)).collect();
    let group: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    let spec = PremetricSpec::scalar_absolute(1.0).unwrap();
    let alpha = 0.05;
    let partition = build_partition(
        &covariates,
        &spec,
        alpha,
        &BlockConstraint::MatchedPair { group: group.clone() },
    )
    .unwrap();
    assert!(penalty(&partition, &spec, &covariates).unwrap() <= alpha / 2.0);
    let m = group_max(&partition, &spec, &covariates).unwrap();
    let n_samples = required_samples(alpha, m).unwrap() + 1000;

    let trials: u64 = 1000;
    let mut rejections = 0u64;
    for trial in 0..trials {
        let data =
            generators::gen_jump(&covariates, rng::derive(50_005, trial)).unwrap();
        let stat =
            TestStatistic::diff_conditional_proportions(group.clone(), symbol_is("1"));
        let result = subsampled_test(
            &data,
            &partition,
            &spec,
            &stat,
            alpha,
            n_samples,
            rng::derive(50_006, trial),
        )
        .unwrap();
        if result.reject {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / trials as f64;
    let limit = alpha + 3.0 * (alpha * (1.0 - alpha) / trials as f64).sqrt();
    assert!(rate <= limit, "rejection rate {rate} exceeds {limit}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "criterion 5 (subsampled test type-1): PASS — rate {rate:.4} <= {limit:.4}, \
         N = {n_samples}, alpha_N(0.05,1,1e5) = {reference:.6}, {elapsed:?}"
    );
}

// --- criterion 6 -----------------------------------------------------------

#[test]
fn criterion_6_penalty_and_max_vs_enumeration() {
    let _guard = serial();
    let start = Instant::now();
    let mut rng = rng::stream(60_006);

    for case in 0..100 {
        // Random size and random blocks; every tenth case is a single block
        // of up to six indices, hitting the enumeration cap of 720 exactly.
        let n: usize = if case % 10 == 9 { 6 } else { rng.random_range(3..=7) };
        let mut indices: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            indices.swap(i, j);
        }
        let mut blocks = Vec::new();
        if case % 10 == 9 {
            blocks.push(indices.clone());
        } else {
            let mut rest = indices.as_slice();
            while !rest.is_empty() {
                let take = rng.random_range(1..=3.min(rest.len()));
                blocks.push(rest[..take].to_vec());
                rest = &rest[take..];
            }
        }
        let partition = BlockPartition::new(blocks, n).unwrap();
        assert!(partition.group_order_capped(720).is_some());

        let covariates: Vec<Covariate> =
            (0..n).map(|i| Covariate::scalar(i as f64)).collect();
        let mut table = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d: f64 = rng.random();
                table[i][j] = d;
                table[j][i] = d;
            }
        }
        let spec = PremetricSpec::table(covariates.clone(), table.clone()).unwrap();

        // Brute-force enumeration of the within-block group via per-block
        // odometer over factorial arrangements.
        let (enum_mean, enum_max) = enumerate_penalties(&partition, &table);
        let closed_penalty = penalty(&partition, &spec, &covariates).unwrap();
        let closed_max = group_max(&partition, &spec, &covariates).unwrap();
        assert!(
            (closed_penalty - enum_mean).abs() <= 1e-12,
            "case {case}: penalty {closed_penalty} vs enumeration {enum_mean}"
        );
        assert!(
            (closed_max - enum_max.max(1.0)).abs() <= 1e-12,
            "case {case}: max {closed_max} vs enumeration {}",
            enum_max.max(1.0)
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 6 (penalty and max vs enumeration): PASS — 100 partitions, \
         both closed forms within 1e-12, {elapsed:?}"
    );
}

fn enumerate_penalties(partition: &BlockPartition, table: &[Vec<f64>]) -> (f64, f64) {
    fn arrangements(items: &[usize]) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut tail in arrangements(&rest) {
                let mut v = vec![head];
                v.append(&mut tail);
                out.push(v);
            }
        }
        out
    }
    let per_block: Vec<Vec<Vec<usize>>> =
        partition.blocks().iter().map(|b| arrangements(b)).collect();
    let mut odometer = vec![0usize; per_block.len()];
    let mut total = 0.0;
    let mut max = 0.0f64;
    let mut count = 0u64;
    loop {
        let mut cost = 0.0;
        for ((block, options), &pick) in
            partition.blocks().iter().zip(&per_block).zip(&odometer)
        {
            for (pos, &image) in options[pick].iter().enumerate() {
                cost += table[block[pos]][image];
            }
        }
        total += cost;
        max = max.max(cost);
        count += 1;
        let mut k = 0;
        loop {
            if k == odometer.len() {
                return (total / count as f64, max);
            }
            odometer[k] += 1;
            if odometer[k] < per_block[k].len() {
                break;
            }
            odometer[k] = 0;
            k += 1;
        }
    }
}

// --- criterion 7 -----------------------------------------------------------

#[test]
fn criterion_7_dsc_estimator_consistency() {
    let _guard = serial();
    let start = Instant::now();
    let covariates: Vec<Covariate> =
        (0..=100).map(|i| Covariate::scalar(i as f64 / 100.0)).collect();
    let mass_before = [1.0, 0.0];
    let mass_after = [0.5, 0.5];
    let truth =
        generators::switching_dsc(&mass_before, &mass_after, 0.3, 0.5).unwrap();
    assert!((truth - 0.1).abs() <= 1e-12);

    let spec = GeneratorSpec {
        kind: GeneratorKind::SwitchingMixture {
            mass_before: mass_before.to_vec(),
            mass_after: mass_after.to_vec(),
        },
        seed: 70_007,
    };
    let ell = PremetricSpec::scalar_absolute(0.5).unwrap();
    let t = Covariate::scalar(0.3);
    let t_prime = Covariate::scalar(0.5);

    let total = 2000usize;
    let bundle = spec.generate(&covariates, total).unwrap();
    let estimate = estimate_dsc(&bundle, &t, &t_prime, &ell).unwrap();
    assert!(
        (estimate.estimate - truth).abs() <= 0.05,
        "estimate {} is off the analytic value {truth} by more than 0.05",
        estimate.estimate
    );

    // Per-realization total variations, for prefix estimates and their
    // Monte Carlo standard errors.
    let per_realization: Vec<f64> = bundle
        .realizations()
        .iter()
        .map(|r| {
            let single = RealizationBundle::new(vec![r.clone()]).unwrap();
            estimate_dsc(&single, &t, &t_prime, &ell).unwrap().estimate
        })
        .collect();
    let full_mean = per_realization.iter().sum::<f64>() / total as f64;
    assert!((full_mean - estimate.estimate).abs() <= 1e-9);

    let mut previous_err: Option<(f64, f64)> = None;
    let mut trail = Vec::new();
    for n in [250usize, 500, 1000, 2000] {
        let prefix = &per_realization[..n];
        let mean = prefix.iter().sum::<f64>() / n as f64;
        let var =
            prefix.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let sigma = (var / n as f64).sqrt();
        let err = (mean - truth).abs();
        if let Some((prev_err, prev_sigma)) = previous_err {
            assert!(
                err <= prev_err + 2.0 * prev_sigma,
                "error {err} at N={n} grew past {prev_err} + 2*{prev_sigma}"
            );
        }
        trail.push(format!("N={n}: err={err:.4}"));
        previous_err = Some((err, sigma));
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "criterion 7 (d_sc estimator): PASS — estimate {:.4} vs 0.1, {}, {elapsed:?}",
        estimate.estimate,
        trail.join(", ")
    );
}

// --- criterion 8 -----------------------------------------------------------

#[test]
fn criterion_8_qualitative_trends() {
    let _guard = serial();
    let start = Instant::now();
    let lambdas = [0.0, 1e-4, 1e-2, 1.0];

    // (a) Mean atom count per query is non-increasing in lambda.
    let hours: Vec<Covariate> =
        (0..200).map(|i| Covariate::scalar(24.0 * i as f64 / 200.0)).collect();
    let queries: Vec<Covariate> =
        (0..24).map(|q| Covariate::scalar(q as f64 + 0.5)).collect();
    let mut mean_atoms = Vec::new();
    for &lambda in &lambdas {
        let spec = PremetricSpec::scalar_cyclic(lambda, 24.0).unwrap();
        let total: usize = queries
            .iter()
            .map(|q| {
                query_weights(&hours, q, &spec, TestFunctionKind::Indicator)
                    .unwrap()
                    .active
            })
            .sum();
        mean_atoms.push(total as f64 / queries.len() as f64);
    }
    for pair in mean_atoms.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-12,
            "atom counts not non-increasing: {mean_atoms:?}"
        );
    }

    // (b) Matched-pair count is non-increasing in lambda.
    let group: Vec<bool> = (0..200).map(|i| i % 2 == 0).collect();
    let mut pair_counts = Vec::new();
    for &lambda in &lambdas {
        let spec = PremetricSpec::scalar_cyclic(lambda, 24.0).unwrap();
        let partition = build_partition(
            &hours,
            &spec,
            0.05,
            &BlockConstraint::MatchedPair { group: group.clone() },
        )
        .unwrap();
        pair_counts.push(
            partition.blocks().iter().filter(|b| b.len() == 2).count(),
        );
    }
    for pair in pair_counts.windows(2) {
        assert!(pair[1] <= pair[0], "pair counts not non-increasing: {pair_counts:?}");
    }

    // (c) Estimation cost scales near-linearithmically: doubling the data
    // multiplies the per-query pipeline time by about 2 log-factors.
    let time_pipeline = |n: usize| -> f64 {
        let covariates: Vec<Covariate> =
            (0..n).map(|i| Covariate::scalar(24.0 * i as f64 / n as f64)).collect();
        let data = generators::gen_iid(&[0.4, 0.6], &covariates, 88).unwrap();
        let spec = PremetricSpec::scalar_cyclic(0.01, 24.0).unwrap();
        let h = TestFunction::indicator_of_symbol("1");
        let queries: Vec<Covariate> =
            (0..50).map(|q| Covariate::scalar(24.0 * q as f64 / 50.0)).collect();
        let begin = Instant::now();
        for q in &queries {
            let m = local_empirical_measure(&data, q, &spec, &h).unwrap();
            let weights: Vec<f64> = m.weights().collect();
            let qw =
                query_weights(&covariates, q, &spec, TestFunctionKind::Indicator).unwrap();
            let sq = squared_error_bound(&weights, &qw.bias).unwrap();
            let ci = confidence_radius(&weights, &qw.bias, 0.1).unwrap();
            std::hint::black_box((m.estimate(&h), sq, ci));
        }
        begin.elapsed().as_secs_f64()
    };
    // Warmup, then 20 measured trials.
    for _ in 0..2 {
        time_pipeline(10_000);
        time_pipeline(20_000);
    }
    let trials = 20;
    let mut ratio_sum = 0.0;
    for _ in 0..trials {
        let t_small = time_pipeline(10_000);
        let t_large = time_pipeline(20_000);
        ratio_sum += t_large / t_small;
    }
    let mean_ratio = ratio_sum / trials as f64;
    assert!(
        mean_ratio <= 2.6,
        "time(2n)/time(n) averaged {mean_ratio}, expected <= 2.6"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 180.0, "took {elapsed:?}");
    println!(
        "criterion 8 (qualitative trends): PASS — atoms {mean_atoms:?}, \
         pairs {pair_counts:?}, time ratio {mean_ratio:.2}, {elapsed:?}"
    );
}

// --- criterion 9 -----------------------------------------------------------

#[test]
fn criterion_9_generator_swap_conformance() {
    let _guard = serial();
    let start = Instant::now();
    let realizations: u64 = 20_000;
    let positions = [0.0, 0.18, 0.35, 0.55, 0.8, 1.0];
    let covariates: Vec<Covariate> =
        positions.iter().map(|&x| Covariate::scalar(x)).collect();

    let specs: Vec<(&str, GeneratorSpec)> = vec![
        (
            "iid",
            GeneratorSpec { kind: GeneratorKind::Iid { mass: vec![0.5, 0.5] }, seed: 90_001 },
        ),
        ("jump", GeneratorSpec { kind: GeneratorKind::Jump, seed: 90_002 }),
        ("square_wave", GeneratorSpec { kind: GeneratorKind::SquareWave, seed: 90_003 }),
        (
            "switching_mixture",
            GeneratorSpec {
                kind: GeneratorKind::SwitchingMixture {
                    mass_before: vec![1.0, 0.0],
                    mass_after: vec![0.5, 0.5],
                },
                seed: 90_004,
            },
        ),
        (
            "latent_gaussian",
            GeneratorSpec {
                kind: GeneratorKind::LatentGaussian {
                    kernel_width: 0.5,
                    noise_variance: 0.5,
                    quantizer: Some(Quantizer { lo: -3.0, hi: 3.0, bins: 4 }),
                },
                seed: 90_005,
            },
        ),
    ];

    let mut worst_margin = f64::NEG_INFINITY;
    for (name, spec) in &specs {
        let premetric = spec.kind.matching_premetric().unwrap();
        // Realize once; reuse the matrix for all swap checks.
        let mut coded: Vec<Vec<usize>> = Vec::with_capacity(realizations as usize);
        let mut alphabet_values: Vec<Value> = Vec::new();
        for r in 0..realizations {
            let obs = spec.generate_one(&covariates, r).unwrap();
            let mut row = Vec::with_capacity(covariates.len());
            for v in obs.values() {
                let idx = match alphabet_values.iter().position(|a| a == v) {
                    Some(i) => i,
                    None => {
                        alphabet_values.push(v.clone());
                        alphabet_values.len() - 1
                    }
                };
                row.push(idx);
            }
            coded.push(row);
        }
        let alphabet_size = alphabet_values.len();

        let mut pair_rng = rng::substream(314_159, spec.seed);
        for case in 0..20 {
            let t_size = pair_rng.random_range(1..=3usize);
            let sources: Vec<usize> =
                sample_indices(&mut pair_rng, covariates.len(), t_size).into_vec();
            let targets: Vec<usize> =
                sample_indices(&mut pair_rng, covariates.len(), t_size).into_vec();

            let mut distance_sum = 0.0;
            for (&s, &t) in sources.iter().zip(&targets) {
                distance_sum +=
                    premetric.eval(&covariates[s], &covariates[t]).unwrap();
            }

            // Tuple frequencies of X_T and X_{pi,T} over the event grid.
            let cells = alphabet_size.pow(t_size as u32);
            let mut count_a = vec![0u64; cells];
            let mut count_b = vec![0u64; cells];
            for row in &coded {
                let mut key_a = 0usize;
                let mut key_b = 0usize;
                for (&s, &t) in sources.iter().zip(&targets) {
                    key_a = key_a * alphabet_size + row[s];
                    key_b = key_b * alphabet_size + row[t];
                }
                count_a[key_a] += 1;
                count_b[key_b] += 1;
            }
            let r = realizations as f64;
            let tv_hat: f64 = count_a
                .iter()
                .zip(&count_b)
                .map(|(&a, &b)| (a as f64 / r - b as f64 / r).abs())
                .sum::<f64>()
                / 2.0;
            // Monte Carlo slack: the L1 noise floor of the two empirical
            // distributions plus three bounded-difference deviations.
            let noise_floor: f64 = count_a
                .iter()
                .zip(&count_b)
                .map(|(&a, &b)| ((a + b) as f64).sqrt())
                .sum::<f64>()
                * 0.5
                / r;
            let slack = noise_floor + 3.0 / r.sqrt();
            assert!(
                tv_hat <= distance_sum + slack,
                "{name} case {case}: TV {tv_hat} exceeds {distance_sum} + {slack} \
                 (T={sources:?}, pi={targets:?})"
            );
            worst_margin = worst_margin.max(tv_hat - distance_sum - slack);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "criterion 9 (generator swap conformance): PASS — 5 generators x 20 swaps, \
         worst margin {worst_margin:.4}, {elapsed:?}"
    );
}

// --- shared sanity ----------------------------------------------------------

/// The acceptance data flows exercise the serialization surfaces used by
/// the command layer; keep a map of the per-criterion seeds here so reruns
/// stay reproducible if cases are added.
#[test]
fn acceptance_seed_registry_is_stable() {
    let _guard = serial();
    let seeds: BTreeMap<&str, u64> = BTreeMap::from([
        ("criterion_1", 101),
        ("criterion_3", 30_003),
        ("criterion_4", 40_004),
        ("criterion_5_data", 50_005),
        ("criterion_5_test", 50_006),
        ("criterion_6", 60_006),
        ("criterion_7", 70_007),
        ("criterion_9_pairs", 314_159),
    ]);
    assert_eq!(seeds.len(), 8);
    let alphabet = Alphabet::from_values(
        [Value::symbol("0"), Value::symbol("1"), Value::symbol("0")].iter(),
    );
    assert_eq!(alphabet.len(), 2);
}
