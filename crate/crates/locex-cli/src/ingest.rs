//! Typed CSV ingestion and emission.
//!
//! Input files are UTF-8, comma-separated, with a header row and `.` as the
//! decimal point. Parse failures carry the file, 1-based line number, and
//! column name. Cyclic covariate columns are reduced modulo their period at
//! ingestion, so stored coordinates always lie in `[0, period)`.

use std::path::Path;

use locex::config::{ColumnKind, PremetricConfig};
use locex::covariate::Covariate;
use locex::data::{ObservationSet, Value};
use locex::dsc::RealizationBundle;

use crate::schema::DatasetSchema;
use crate::{CliError, Result};

/// Fully ingested rows: whatever the schema declares, column by column.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub covariates: Vec<Covariate>,
    pub values: Option<Vec<Value>>,
    pub group: Option<Vec<bool>>,
    pub outcome: Option<Vec<bool>>,
    pub realization: Option<Vec<String>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.covariates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covariates.is_empty()
    }

    /// Covariates plus observation values.
    pub fn observations(&self) -> Result<ObservationSet> {
        let values = self.values.clone().ok_or_else(|| {
            CliError::Schema("this command needs an observation column".into())
        })?;
        ObservationSet::new(self.covariates.clone(), values).map_err(CliError::Core)
    }

    /// Covariates plus outcome flags as "1"/"0" symbols: the permuted
    /// quantity of the built-in randomization statistic.
    pub fn outcome_observations(&self) -> Result<ObservationSet> {
        let outcome = self.outcome.as_ref().ok_or_else(|| {
            CliError::Schema("this command needs an outcome column".into())
        })?;
        let values = outcome
            .iter()
            .map(|&flag| Value::symbol(if flag { "1" } else { "0" }))
            .collect();
        ObservationSet::new(self.covariates.clone(), values).map_err(CliError::Core)
    }

    pub fn group_flags(&self) -> Result<&[bool]> {
        self.group
            .as_deref()
            .ok_or_else(|| CliError::Schema("this command needs a group column".into()))
    }

    /// Split rows into one observation set per realization id, ids ordered
    /// by first appearance.
    pub fn into_bundle(self) -> Result<(RealizationBundle, Vec<String>)> {
        let ids = self.realization.ok_or_else(|| {
            CliError::Schema("this command needs a realization column".into())
        })?;
        let values = self.values.ok_or_else(|| {
            CliError::Schema("this command needs an observation column".into())
        })?;
        let mut order: Vec<String> = Vec::new();
        let mut groups: Vec<ObservationSet> = Vec::new();
        for ((id, covariate), value) in ids.into_iter().zip(self.covariates).zip(values) {
            let slot = match order.iter().position(|known| *known == id) {
                Some(i) => i,
                None => {
                    order.push(id);
                    groups.push(ObservationSet::default());
                    groups.len() - 1
                }
            };
            groups[slot].push(covariate, value);
        }
        Ok((RealizationBundle::new(groups)?, order))
    }
}

struct ColumnRef {
    name: String,
    index: usize,
}

fn resolve(header: &csv::StringRecord, path: &Path, name: &str) -> Result<ColumnRef> {
    header
        .iter()
        .position(|h| h == name)
        .map(|index| ColumnRef { name: name.to_string(), index })
        .ok_or_else(|| CliError::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
}

fn parse_f64(raw: &str, path: &Path, line: u64, column: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| CliError::Parse {
        path: path.to_path_buf(),
        line,
        column: column.to_string(),
        value: raw.to_string(),
        expected: "a real number",
    })
}

fn parse_bool(raw: &str, path: &Path, line: u64, column: &str) -> Result<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        _ => Err(CliError::Parse {
            path: path.to_path_buf(),
            line,
            column: column.to_string(),
            value: raw.to_string(),
            expected: "a boolean (1/0, true/false, yes/no)",
        }),
    }
}

/// Read a data file against a schema. Only the columns the schema declares
/// are consulted; the observation column may be absent from the schema (for
/// covariates-only design inputs) but any declared column must exist.
pub fn ingest(path: &Path, schema: &DatasetSchema) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| match source.kind() {
        csv::ErrorKind::Io(_) => CliError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(source.to_string()),
        },
        _ => CliError::Csv { path: path.to_path_buf(), source },
    })?;
    let header = reader
        .headers()
        .map_err(|source| CliError::Csv { path: path.to_path_buf(), source })?
        .clone();

    let mut categorical_refs = Vec::new();
    let mut numeric_refs: Vec<(ColumnRef, Option<f64>)> = Vec::new();
    for entry in &schema.covariate {
        let column = resolve(&header, path, &entry.column)?;
        match entry.kind {
            ColumnKind::Categorical => categorical_refs.push(column),
            ColumnKind::Numeric => numeric_refs.push((column, entry.period)),
        }
    }
    let observation_ref = schema
        .observation
        .as_ref()
        .map(|o| resolve(&header, path, &o.column).map(|r| (r, o.kind)))
        .transpose()?;
    let group_ref =
        schema.group.as_ref().map(|c| resolve(&header, path, &c.column)).transpose()?;
    let outcome_ref =
        schema.outcome.as_ref().map(|c| resolve(&header, path, &c.column)).transpose()?;
    let realization_ref = schema
        .realization
        .as_ref()
        .map(|c| resolve(&header, path, &c.column))
        .transpose()?;

    let mut dataset = Dataset {
        covariates: Vec::new(),
        values: observation_ref.as_ref().map(|_| Vec::new()),
        group: group_ref.as_ref().map(|_| Vec::new()),
        outcome: outcome_ref.as_ref().map(|_| Vec::new()),
        realization: realization_ref.as_ref().map(|_| Vec::new()),
    };

    for (row_index, record) in reader.records().enumerate() {
        // Header is line 1.
        let line = row_index as u64 + 2;
        let record =
            record.map_err(|source| CliError::Csv { path: path.to_path_buf(), source })?;
        let cell = |column: &ColumnRef| -> &str { record.get(column.index).unwrap_or("") };

        let categorical: Vec<String> =
            categorical_refs.iter().map(|c| cell(c).to_string()).collect();
        let mut numeric = Vec::with_capacity(numeric_refs.len());
        for (column, period) in &numeric_refs {
            let mut x = parse_f64(cell(column), path, line, &column.name)?;
            if let Some(p) = period {
                x = x.rem_euclid(*p);
            }
            numeric.push(x);
        }
        dataset.covariates.push(Covariate::new(categorical, numeric));

        if let (Some((column, kind)), Some(values)) =
            (&observation_ref, dataset.values.as_mut())
        {
            let raw = cell(column);
            values.push(match kind {
                ColumnKind::Categorical => Value::symbol(raw),
                ColumnKind::Numeric => Value::Real(parse_f64(raw, path, line, &column.name)?),
            });
        }
        if let (Some(column), Some(group)) = (&group_ref, dataset.group.as_mut()) {
            group.push(parse_bool(cell(column), path, line, &column.name)?);
        }
        if let (Some(column), Some(outcome)) = (&outcome_ref, dataset.outcome.as_mut()) {
            outcome.push(parse_bool(cell(column), path, line, &column.name)?);
        }
        if let (Some(column), Some(ids)) = (&realization_ref, dataset.realization.as_mut()) {
            ids.push(cell(column).to_string());
        }
    }

    if dataset.is_empty() {
        return Err(CliError::EmptyData { path: path.to_path_buf() });
    }
    Ok(dataset)
}

/// Read query covariates: a CSV whose header contains the schema's
/// covariate columns.
pub fn ingest_queries(path: &Path, schema: &DatasetSchema) -> Result<Vec<Covariate>> {
    let query_schema = DatasetSchema {
        covariate: schema.covariate.clone(),
        observation: None,
        group: None,
        outcome: None,
        realization: None,
        test_function: None,
    };
    Ok(ingest(path, &query_schema)?.covariates)
}

/// Render a multi-realization dataset as CSV text: realization id, the
/// covariate columns in schema order, then the observation column.
pub fn render_bundle_csv(
    bundle: &RealizationBundle,
    ids: &[String],
    premetric: &PremetricConfig,
    realization_column: &str,
    observation_column: &str,
) -> String {
    let mut out = String::new();
    out.push_str(realization_column);
    for entry in &premetric.covariate {
        out.push(',');
        out.push_str(&entry.column);
    }
    out.push(',');
    out.push_str(observation_column);
    out.push('\n');

    for (realization, id) in bundle.realizations().iter().zip(ids) {
        for (covariate, value) in realization.iter() {
            out.push_str(id);
            let mut categorical = covariate.categorical.iter();
            let mut numeric = covariate.numeric.iter();
            for entry in &premetric.covariate {
                out.push(',');
                match entry.kind {
                    ColumnKind::Categorical => {
                        out.push_str(categorical.next().expect("schema arity"))
                    }
                    ColumnKind::Numeric => {
                        out.push_str(&numeric.next().expect("schema arity").to_string())
                    }
                }
            }
            out.push(',');
            out.push_str(&value.to_string());
            out.push('\n');
        }
    }
    out
}
