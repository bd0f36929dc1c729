//! The six commands. Each returns the report JSON as a string; writing to
//! `--out` (and `--table` where applicable) happens here so a command call
//! is a complete, reproducible unit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use locex::config::{ColumnEntry, ColumnKind, ColumnLayout, PremetricConfig};
use locex::covariate::Covariate;
use locex::data::Value;
use locex::dsc::estimate_dsc;
use locex::empirical::{
    confidence_radius, query_weights, squared_error_bound, tail_bound, TestFunctionKind,
};
use locex::generators::{GeneratorKind, GeneratorSpec};
use locex::premetric::{self, PremetricSpec};
use locex::randomization::{
    build_partition, exact_test, group_max, penalty, required_samples, subsampled_test,
    BlockConstraint, TestResult, TestStatistic, ENUMERATION_BUDGET,
};
use locex::rng;
use locex::Error as CoreError;

use crate::ingest;
use crate::manifest::{render_report, text_hash, RunManifest};
use crate::schema::DatasetSchema;
use crate::{CliError, Result};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_schema(path: &Path) -> Result<(DatasetSchema, String)> {
    let text = read_text(path)?;
    Ok((DatasetSchema::parse(&text)?, text))
}

fn load_premetric_override(path: Option<&Path>) -> Result<Option<PremetricConfig>> {
    match path {
        Some(p) => {
            let text = read_text(p)?;
            Ok(Some(PremetricConfig::parse(&text).map_err(CliError::Core)?))
        }
        None => Ok(None),
    }
}

/// Render a covariate as a name -> value map in schema column order.
fn covariate_map(
    covariate: &Covariate,
    layout: &ColumnLayout,
) -> BTreeMap<String, serde_json::Value> {
    let mut map = BTreeMap::new();
    for (name, label) in layout.categorical.iter().zip(&covariate.categorical) {
        map.insert(name.clone(), serde_json::Value::from(label.clone()));
    }
    for (name, &x) in layout.numeric.iter().zip(&covariate.numeric) {
        map.insert(name.clone(), serde_json::Value::from(x));
    }
    map
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn csv_text(rows: &[Vec<String>]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .write_record(row)
            .map_err(|e| CliError::Schema(format!("cannot render table: {e}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Schema(format!("cannot render table: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
}

// --- estimate ---------------------------------------------------------------

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Input data CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Dataset schema TOML.
    #[arg(long)]
    pub schema: PathBuf,
    /// Optional premetric override TOML (same covariate columns).
    #[arg(long)]
    pub premetric: Option<PathBuf>,
    /// CSV of query covariates (header = covariate columns).
    #[arg(long)]
    pub query: PathBuf,
    /// Level for confidence radii.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Optional radius at which to report the tail probability bound.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Report JSON path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional CSV table of per-query results.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Serialize)]
struct AtomReport {
    weight: f64,
    value: Value,
}

#[derive(Serialize)]
struct QueryEstimate {
    query: BTreeMap<String, serde_json::Value>,
    estimate: f64,
    active_atoms: usize,
    sq_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_bound: Option<f64>,
    /// Smallest radius with tail bound <= alpha; null when unattainable.
    confidence_radius: Option<f64>,
    atoms: Vec<AtomReport>,
}

pub fn run_estimate(args: &EstimateArgs) -> Result<String> {
    let (schema, schema_text) = load_schema(&args.schema)?;
    let override_config = load_premetric_override(args.premetric.as_deref())?;
    let (layout, spec, config) = schema.build_premetric(override_config.as_ref())?;
    let h = schema.test_function()?;
    let data = ingest::ingest(&args.data, &schema)?.observations()?;
    let queries = ingest::ingest_queries(&args.query, &schema)?;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::InvalidArgument(format!(
            "--alpha must be in (0, 1), got {}",
            args.alpha
        )));
    }

    let mut reports = Vec::with_capacity(queries.len());
    for query in &queries {
        let qw = query_weights(data.covariates(), query, &spec, h.kind())?;
        let estimate: f64 = qw
            .weights
            .iter()
            .zip(data.values())
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, v)| w * h.eval(v))
            .sum();
        let sq = squared_error_bound(&qw.weights, &qw.bias)?;
        let tail = match args.delta {
            Some(delta) => Some(tail_bound(&qw.weights, &qw.bias, delta)?),
            None => None,
        };
        let radius = confidence_radius(&qw.weights, &qw.bias, args.alpha)?;
        let atoms = qw
            .weights
            .iter()
            .zip(data.values())
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, v)| AtomReport { weight: w, value: v.clone() })
            .collect();
        reports.push(QueryEstimate {
            query: covariate_map(query, &layout),
            estimate,
            active_atoms: qw.active,
            sq_bound: sq,
            tail_bound: tail,
            confidence_radius: finite_or_none(radius),
            atoms,
        });
    }

    if let Some(table_path) = &args.table {
        let mut rows = Vec::new();
        let mut header: Vec<String> = layout.categorical.clone();
        header.extend(layout.numeric.clone());
        header.extend(
            ["estimate", "active_atoms", "sq_bound", "confidence_radius"]
                .map(String::from),
        );
        rows.push(header);
        for (query, report) in queries.iter().zip(&reports) {
            let mut row: Vec<String> = query.categorical.clone();
            row.extend(query.numeric.iter().map(|x| x.to_string()));
            row.push(report.estimate.to_string());
            row.push(report.active_atoms.to_string());
            row.push(report.sq_bound.to_string());
            row.push(
                report
                    .confidence_radius
                    .map_or_else(|| "inf".to_string(), |r| r.to_string()),
            );
            rows.push(row);
        }
        write_text(table_path, &csv_text(&rows)?)?;
    }

    let mut manifest = RunManifest::new("estimate");
    manifest.schema_hash = Some(text_hash(&schema_text));
    manifest.premetric = Some(config);
    manifest.parameter("alpha", args.alpha)?;
    if let Some(delta) = args.delta {
        manifest.parameter("delta", delta)?;
    }
    manifest.parameter(
        "queries",
        queries.iter().map(|q| covariate_map(q, &layout)).collect::<Vec<_>>(),
    )?;
    manifest.parameter("n_observations", data.len())?;

    let json = render_report(&manifest, serde_json::json!({ "queries": reports }))?;
    if let Some(out) = &args.out {
        write_text(out, &json)?;
    }
    Ok(json)
}

// --- test -------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintChoice {
    /// At most one treated and one control observation per block.
    MatchedPair,
    /// Blocks capped at --max-block-size.
    MaxSize,
    /// No constraint.
    None,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub premetric: Option<PathBuf>,
    /// Type-1 error level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Monte Carlo randomizations (required when the permutation group is
    /// too large to enumerate).
    #[arg(long)]
    pub n_perms: Option<u64>,
    /// Master seed; all randomization draws derive from it.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ConstraintChoice::MatchedPair)]
    pub constraint: ConstraintChoice,
    #[arg(long)]
    pub max_block_size: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum TestOutcome {
    Completed {
        #[serde(flatten)]
        result: TestResult,
        path: &'static str,
        n_blocks: usize,
        matched_pairs: usize,
    },
    NeedsMoreSamples {
        alpha_n: f64,
        n_requested: u64,
        required_samples: u64,
        n_blocks: usize,
        matched_pairs: usize,
        partition: Vec<Vec<usize>>,
    },
}

fn resolve_constraint(
    choice: ConstraintChoice,
    max_block_size: Option<usize>,
    group: Option<&[bool]>,
) -> Result<BlockConstraint> {
    match choice {
        ConstraintChoice::MatchedPair => {
            let group = group.ok_or_else(|| {
                CliError::Schema("the matched-pair constraint needs a group column".into())
            })?;
            Ok(BlockConstraint::MatchedPair { group: group.to_vec() })
        }
        ConstraintChoice::MaxSize => {
            let limit = max_block_size.ok_or_else(|| {
                CliError::InvalidArgument(
                    "--constraint max-size needs --max-block-size".into(),
                )
            })?;
            Ok(BlockConstraint::MaxSize(limit))
        }
        ConstraintChoice::None => Ok(BlockConstraint::None),
    }
}

pub fn run_test(args: &TestArgs) -> Result<String> {
    let (schema, schema_text) = load_schema(&args.schema)?;
    let override_config = load_premetric_override(args.premetric.as_deref())?;
    let (_, spec, config) = schema.build_premetric(override_config.as_ref())?;
    let dataset = ingest::ingest(&args.data, &schema)?;
    let group = dataset.group_flags()?.to_vec();
    let data = dataset.outcome_observations()?;
    let constraint =
        resolve_constraint(args.constraint, args.max_block_size, Some(&group))?;

    let partition = build_partition(data.covariates(), &spec, args.alpha, &constraint)?;
    let n_blocks = partition.n_blocks();
    let matched_pairs = partition.blocks().iter().filter(|b| b.len() == 2).count();
    let stat = TestStatistic::diff_conditional_proportions(group, |v| {
        *v == Value::symbol("1")
    });

    let outcome = if partition.group_order_capped(ENUMERATION_BUDGET).is_some() {
        let result = exact_test(&data, &partition, &spec, &stat, args.alpha)?;
        TestOutcome::Completed { result, path: "exact", n_blocks, matched_pairs }
    } else {
        let n_perms = args.n_perms.ok_or_else(|| {
            CliError::InvalidArgument(
                "the permutation group is too large to enumerate; pass --n-perms".into(),
            )
        })?;
        let test_seed = rng::derive_named(args.seed, "randomization");
        match subsampled_test(&data, &partition, &spec, &stat, args.alpha, n_perms, test_seed)
        {
            Ok(mut result) => {
                // Record the user-visible master seed for replay.
                result.seed = Some(args.seed);
                TestOutcome::Completed { result, path: "subsampled", n_blocks, matched_pairs }
            }
            Err(CoreError::InsufficientSamples { alpha_n, n, required }) => {
                TestOutcome::NeedsMoreSamples {
                    alpha_n,
                    n_requested: n,
                    required_samples: required,
                    n_blocks,
                    matched_pairs,
                    partition: partition.blocks().to_vec(),
                }
            }
            Err(other) => return Err(other.into()),
        }
    };

    let mut manifest = RunManifest::new("test");
    manifest.schema_hash = Some(text_hash(&schema_text));
    manifest.premetric = Some(config);
    manifest.seed = Some(args.seed);
    manifest.parameter("alpha", args.alpha)?;
    if let Some(n) = args.n_perms {
        manifest.parameter("n_perms", n)?;
    }
    manifest.parameter("constraint", format!("{:?}", args.constraint))?;
    if let Some(k) = args.max_block_size {
        manifest.parameter("max_block_size", k)?;
    }

    let json = render_report(&manifest, outcome)?;
    if let Some(out) = &args.out {
        write_text(out, &json)?;
    }
    Ok(json)
}

// --- design -----------------------------------------------------------------

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Covariates-only data CSV (observation column may be absent).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub premetric: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Optional query covariates for weight profiles and bounds.
    #[arg(long)]
    pub query: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Serialize)]
struct QueryDesign {
    query: BTreeMap<String, serde_json::Value>,
    active_atoms: usize,
    /// Nonzero weights as (observation index, weight) pairs.
    weights: Vec<(usize, f64)>,
    sq_bound: f64,
    confidence_radius: Option<f64>,
}

pub fn run_design(args: &DesignArgs) -> Result<String> {
    let (schema, schema_text) = load_schema(&args.schema)?;
    // Design runs before observations exist; drop value-bearing columns.
    let covariates_only = DatasetSchema {
        observation: None,
        outcome: None,
        test_function: schema.test_function.clone(),
        ..schema.clone()
    };
    let override_config = load_premetric_override(args.premetric.as_deref())?;
    let (layout, spec, config) = schema.build_premetric(override_config.as_ref())?;
    let dataset = ingest::ingest(&args.data, &covariates_only)?;

    let constraint = match &dataset.group {
        Some(group) => BlockConstraint::MatchedPair { group: group.clone() },
        None => BlockConstraint::None,
    };
    let partition = build_partition(&dataset.covariates, &spec, args.alpha, &constraint)?;
    let pen = penalty(&partition, &spec, &dataset.covariates)?;
    let m = group_max(&partition, &spec, &dataset.covariates)?;
    let required = required_samples(args.alpha, m)?;
    let matched_pairs = partition.blocks().iter().filter(|b| b.len() == 2).count();

    // Weight profiles depend only on covariates; the test-function kind
    // sets the bias rule (indicator when not configured).
    let kind = match schema.test_function {
        Some(_) => schema.test_function()?.kind(),
        None => TestFunctionKind::Indicator,
    };
    let queries = match &args.query {
        Some(path) => ingest::ingest_queries(path, &schema)?,
        None => Vec::new(),
    };
    let mut profiles = Vec::with_capacity(queries.len());
    for query in &queries {
        let qw = query_weights(&dataset.covariates, query, &spec, kind)?;
        let weights: Vec<(usize, f64)> = qw
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, &w)| (i, w))
            .collect();
        let sq = squared_error_bound(&qw.weights, &qw.bias)?;
        let radius = confidence_radius(&qw.weights, &qw.bias, args.alpha)?;
        profiles.push(QueryDesign {
            query: covariate_map(query, &layout),
            active_atoms: qw.active,
            weights,
            sq_bound: sq,
            confidence_radius: finite_or_none(radius),
        });
    }

    if let Some(table_path) = &args.table {
        let mut rows = Vec::new();
        let mut header: Vec<String> = layout.categorical.clone();
        header.extend(layout.numeric.clone());
        header.extend(
            ["active_atoms", "sq_bound", "confidence_radius"].map(String::from),
        );
        rows.push(header);
        for (query, profile) in queries.iter().zip(&profiles) {
            let mut row: Vec<String> = query.categorical.clone();
            row.extend(query.numeric.iter().map(|x| x.to_string()));
            row.push(profile.active_atoms.to_string());
            row.push(profile.sq_bound.to_string());
            row.push(
                profile
                    .confidence_radius
                    .map_or_else(|| "inf".to_string(), |r| r.to_string()),
            );
            rows.push(row);
        }
        write_text(table_path, &csv_text(&rows)?)?;
    }

    let mut manifest = RunManifest::new("design");
    manifest.schema_hash = Some(text_hash(&schema_text));
    manifest.premetric = Some(config);
    manifest.parameter("alpha", args.alpha)?;
    manifest.parameter(
        "queries",
        queries.iter().map(|q| covariate_map(q, &layout)).collect::<Vec<_>>(),
    )?;

    let result = serde_json::json!({
        "partition": partition.blocks(),
        "n_blocks": partition.n_blocks(),
        "matched_pairs": matched_pairs,
        "penalty": pen,
        "group_max": m,
        "required_samples": required,
        "queries": profiles,
    });
    let json = render_report(&manifest, result)?;
    if let Some(out) = &args.out {
        write_text(out, &json)?;
    }
    Ok(json)
}

// --- estimate-premetric -------------------------------------------------------

#[derive(Debug, Args)]
pub struct EstimatePremetricArgs {
    /// Multi-realization data CSV (realization column required).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Dominating premetric override TOML.
    #[arg(long)]
    pub premetric: Option<PathBuf>,
    /// CSV with exactly two query covariates: the pair (t, t').
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_estimate_premetric(args: &EstimatePremetricArgs) -> Result<String> {
    let (schema, schema_text) = load_schema(&args.schema)?;
    match &schema.observation {
        Some(obs) if obs.kind == ColumnKind::Categorical => {}
        Some(_) => {
            return Err(CliError::Schema(
                "estimate-premetric needs a finite observation alphabet; declare the \
                 observation column categorical"
                    .into(),
            ))
        }
        None => {
            return Err(CliError::Schema("this command needs an observation column".into()))
        }
    }
    let override_config = load_premetric_override(args.premetric.as_deref())?;
    let (layout, ell, config) = schema.build_premetric(override_config.as_ref())?;
    let (bundle, _ids) = ingest::ingest(&args.data, &schema)?.into_bundle()?;
    let queries = ingest::ingest_queries(&args.query, &schema)?;
    let [t, t_prime] = queries.as_slice() else {
        return Err(CliError::InvalidArgument(format!(
            "--query must contain exactly two covariates (t and t'), got {}",
            queries.len()
        )));
    };

    let estimate = estimate_dsc(&bundle, t, t_prime, &ell)?;

    let mut manifest = RunManifest::new("estimate-premetric");
    manifest.schema_hash = Some(text_hash(&schema_text));
    manifest.premetric = Some(config);
    manifest.parameter("t", covariate_map(t, &layout))?;
    manifest.parameter("t_prime", covariate_map(t_prime, &layout))?;

    let result = serde_json::json!({
        "t": covariate_map(t, &layout),
        "t_prime": covariate_map(t_prime, &layout),
        "estimate": estimate.estimate,
        "n_realizations": estimate.n_realizations,
        "alphabet_size": estimate.alphabet_size,
        "max_min_distance": estimate.max_min_distance,
        "caveat": "assumes the supplied premetric dominates the strong canonical \
                   premetric; this is asymptotic and not verifiable from finite data",
    });
    let json = render_report(&manifest, result)?;
    if let Some(out) = &args.out {
        write_text(out, &json)?;
    }
    Ok(json)
}

// --- simulate -----------------------------------------------------------------

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Generator configuration TOML.
    #[arg(long)]
    pub generator: PathBuf,
    /// Output CSV path for the multi-realization dataset.
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed for all realizations.
    #[arg(long)]
    pub seed: u64,
}

fn default_realization_column() -> String {
    "realization".into()
}
fn default_covariate_column() -> String {
    "x".into()
}
fn default_observation_column() -> String {
    "value".into()
}
fn default_replicates() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    start: f64,
    stop: f64,
    points: usize,
    #[serde(default = "default_replicates")]
    replicates: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputConfig {
    n_realizations: usize,
    #[serde(default = "default_realization_column")]
    realization_column: String,
    #[serde(default = "default_covariate_column")]
    covariate_column: String,
    #[serde(default = "default_observation_column")]
    observation_column: String,
}

// No deny_unknown_fields here: the flattened generator kind consumes the
// top-level fields.
#[derive(Debug, Deserialize)]
struct SimulateConfig {
    #[serde(flatten)]
    kind: GeneratorKind,
    grid: GridConfig,
    output: OutputConfig,
}

pub fn run_simulate(args: &SimulateArgs) -> Result<String> {
    let text = read_text(&args.generator)?;
    let config: SimulateConfig =
        toml::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))?;
    if config.grid.points == 0 || config.grid.replicates == 0 {
        return Err(CliError::InvalidArgument(
            "grid points and replicates must be positive".into(),
        ));
    }
    if config.output.n_realizations == 0 {
        return Err(CliError::InvalidArgument("n_realizations must be positive".into()));
    }

    let mut covariates = Vec::with_capacity(config.grid.points * config.grid.replicates);
    for i in 0..config.grid.points {
        let x = if config.grid.points == 1 {
            config.grid.start
        } else {
            config.grid.start
                + (config.grid.stop - config.grid.start) * i as f64
                    / (config.grid.points - 1) as f64
        };
        for _ in 0..config.grid.replicates {
            covariates.push(Covariate::scalar(x));
        }
    }

    let generator =
        GeneratorSpec { kind: config.kind, seed: rng::derive_named(args.seed, "simulate") };
    let bundle = generator.generate(&covariates, config.output.n_realizations)?;
    let ids: Vec<String> =
        (0..config.output.n_realizations).map(|r| r.to_string()).collect();

    // Emit alongside the premetric this generator is locally exchangeable
    // under, so downstream schemas can copy it directly.
    let matching = generator.kind.matching_premetric()?;
    let matching_weight = match &matching {
        PremetricSpec::Weighted(w) => w.numeric[0].weight,
        PremetricSpec::Table(_) => unreachable!("generators use weighted premetrics"),
    };
    let emit_config = PremetricConfig {
        covariate: vec![ColumnEntry {
            column: config.output.covariate_column.clone(),
            kind: ColumnKind::Numeric,
            weight: Some(matching_weight),
            period: None,
        }],
    };
    let csv = ingest::render_bundle_csv(
        &bundle,
        &ids,
        &emit_config,
        &config.output.realization_column,
        &config.output.observation_column,
    );
    write_text(&args.out, &csv)?;

    let mut manifest = RunManifest::new("simulate");
    manifest.generator = Some(generator);
    manifest.seed = Some(args.seed);
    manifest.parameter(
        "grid",
        serde_json::json!({
            "start": config.grid.start,
            "stop": config.grid.stop,
            "points": config.grid.points,
            "replicates": config.grid.replicates,
        }),
    )?;
    manifest.parameter("n_realizations", config.output.n_realizations)?;

    let result = serde_json::json!({
        "rows": covariates.len() * config.output.n_realizations,
        "n_points": covariates.len(),
        "n_realizations": config.output.n_realizations,
        "matching_premetric": {
            "column": config.output.covariate_column,
            "kind": "numeric",
            "weight": matching_weight,
        },
    });
    render_report(&manifest, result)
}

// --- validate-premetric ---------------------------------------------------------

#[derive(Debug, Args)]
pub struct ValidatePremetricArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long)]
    pub premetric: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Cap on the deterministic stride subsample checked by validate.
const VALIDATE_SAMPLE_CAP: usize = 300;
/// Cap on violations echoed into the report.
const VALIDATE_VIOLATION_CAP: usize = 50;

pub fn run_validate_premetric(args: &ValidatePremetricArgs) -> Result<String> {
    let (schema, schema_text) = load_schema(&args.schema)?;
    let covariates_only = DatasetSchema {
        observation: None,
        outcome: None,
        group: None,
        realization: None,
        test_function: None,
        ..schema.clone()
    };
    let override_config = load_premetric_override(args.premetric.as_deref())?;
    let (_, spec, config) = schema.build_premetric(override_config.as_ref())?;
    let dataset = ingest::ingest(&args.data, &covariates_only)?;

    let stride = dataset.len().div_ceil(VALIDATE_SAMPLE_CAP).max(1);
    let sample: Vec<Covariate> =
        dataset.covariates.iter().step_by(stride).cloned().collect();
    let report = premetric::validate(&spec, &sample)?;

    let mut manifest = RunManifest::new("validate-premetric");
    manifest.schema_hash = Some(text_hash(&schema_text));
    manifest.premetric = Some(config);
    manifest.parameter("sample_stride", stride)?;

    let result = serde_json::json!({
        "sampled_covariates": sample.len(),
        "checked_pairs": report.checked_pairs,
        "passed": report.passed(),
        "violations": report.violations.iter().take(VALIDATE_VIOLATION_CAP).collect::<Vec<_>>(),
    });
    let json = render_report(&manifest, result)?;
    if let Some(out) = &args.out {
        write_text(out, &json)?;
    }
    Ok(json)
}
