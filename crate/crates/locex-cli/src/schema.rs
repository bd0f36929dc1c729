//! Dataset schema: which CSV columns hold covariates, observations, and the
//! optional group / outcome / realization labels, plus the test-function
//! configuration for estimation.

use serde::{Deserialize, Serialize};

use locex::config::{ColumnEntry, ColumnKind, ColumnLayout, PremetricConfig};
use locex::data::Value;
use locex::empirical::TestFunction;
use locex::premetric::PremetricSpec;

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationColumn {
    pub column: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedColumn {
    pub column: String,
}

/// Indicator test function over the observation column: membership in a
/// symbol set for categorical observations, or an interval for numeric
/// ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionConfig {
    pub kind: TestFunctionKindConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunctionKindConfig {
    Indicator,
}

/// The full dataset schema, parsed from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSchema {
    #[serde(default)]
    pub covariate: Vec<ColumnEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<ObservationColumn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<NamedColumn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<NamedColumn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization: Option<NamedColumn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_function: Option<TestFunctionConfig>,
}

impl DatasetSchema {
    pub fn parse(text: &str) -> Result<Self> {
        let schema: DatasetSchema =
            toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        schema.check()?;
        Ok(schema)
    }

    fn check(&self) -> Result<()> {
        let mut names: Vec<&str> = self.covariate.iter().map(|c| c.column.as_str()).collect();
        for extra in [
            self.observation.as_ref().map(|o| o.column.as_str()),
            self.group.as_ref().map(|c| c.column.as_str()),
            self.outcome.as_ref().map(|c| c.column.as_str()),
            self.realization.as_ref().map(|c| c.column.as_str()),
        ]
        .into_iter()
        .flatten()
        {
            names.push(extra);
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(CliError::Schema(format!("column {name:?} declared twice")));
            }
        }
        if self.covariate.is_empty() {
            return Err(CliError::Schema("schema declares no covariate columns".into()));
        }
        // Premetric-level validation (weights, periods, kinds).
        self.premetric_config().build().map_err(CliError::Core)?;
        Ok(())
    }

    /// The premetric section embedded in this schema.
    pub fn premetric_config(&self) -> PremetricConfig {
        PremetricConfig { covariate: self.covariate.clone() }
    }

    /// Build the premetric, honoring an override configuration when given.
    /// An override must list the same columns as the schema (weights and
    /// periods may differ).
    pub fn build_premetric(
        &self,
        override_config: Option<&PremetricConfig>,
    ) -> Result<(ColumnLayout, PremetricSpec, PremetricConfig)> {
        let config = match override_config {
            Some(over) => {
                let mut ours: Vec<&str> =
                    self.covariate.iter().map(|c| c.column.as_str()).collect();
                let mut theirs: Vec<&str> =
                    over.covariate.iter().map(|c| c.column.as_str()).collect();
                ours.sort_unstable();
                theirs.sort_unstable();
                if ours != theirs {
                    return Err(CliError::Schema(
                        "premetric override must cover exactly the schema's covariate columns"
                            .into(),
                    ));
                }
                over.clone()
            }
            None => self.premetric_config(),
        };
        let (layout, spec) = config.build().map_err(CliError::Core)?;
        Ok((layout, spec, config))
    }

    /// The indicator test function configured for the observation column.
    pub fn test_function(&self) -> Result<TestFunction> {
        let observation = self.observation.as_ref().ok_or_else(|| {
            CliError::Schema("this command needs an observation column".into())
        })?;
        let config = self.test_function.as_ref().ok_or_else(|| {
            CliError::Schema("this command needs a [test_function] section".into())
        })?;
        match (observation.kind, &config.symbols, config.min, config.max) {
            (ColumnKind::Categorical, Some(symbols), None, None) => {
                if symbols.is_empty() {
                    return Err(CliError::Schema(
                        "[test_function] symbols must be nonempty".into(),
                    ));
                }
                let targets: Vec<Value> =
                    symbols.iter().map(|s| Value::symbol(s.clone())).collect();
                Ok(TestFunction::indicator(move |v| targets.contains(v)))
            }
            (ColumnKind::Numeric, None, min, max) if min.is_some() || max.is_some() => {
                let lo = min.unwrap_or(f64::NEG_INFINITY);
                let hi = max.unwrap_or(f64::INFINITY);
                Ok(TestFunction::indicator(move |v| match v {
                    Value::Real(x) => (lo..=hi).contains(x),
                    Value::Symbol(_) => false,
                }))
            }
            (ColumnKind::Categorical, _, _, _) => Err(CliError::Schema(
                "categorical observations take [test_function] symbols, not min/max".into(),
            )),
            (ColumnKind::Numeric, _, _, _) => Err(CliError::Schema(
                "numeric observations take [test_function] min and/or max, not symbols".into(),
            )),
        }
    }
}
