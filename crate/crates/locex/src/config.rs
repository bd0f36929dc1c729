//! Plain-text configuration for premetrics.
//!
//! A premetric over named data columns is described by a list of
//! per-column entries:
//!
//! ```toml
//! [[covariate]]
//! column = "hour"
//! kind = "numeric"
//! weight = 0.1
//! period = 24.0
//!
//! [[covariate]]
//! column = "vehicle"
//! kind = "categorical"
//! ```
//!
//! Categorical entries are hard mismatches (distance one when labels
//! differ); numeric entries contribute `weight * distance`, cyclic when a
//! period is given. Floating-point fields round-trip bit-exactly: values
//! are printed in the shortest form that parses back to the same bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::premetric::{NumericTerm, PremetricSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical,
    Numeric,
}

/// One column of the premetric configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnEntry {
    pub column: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

/// The `[[covariate]]` section list.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PremetricConfig {
    #[serde(default)]
    pub covariate: Vec<ColumnEntry>,
}

/// Column names in coordinate order, split by kind, as produced by
/// [`PremetricConfig::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnLayout {
    pub categorical: Vec<String>,
    pub numeric: Vec<String>,
}

impl PremetricConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: PremetricConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn render(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn check(&self) -> Result<()> {
        for (i, entry) in self.covariate.iter().enumerate() {
            if entry.column.is_empty() {
                return Err(Error::Config(format!("covariate {i} has an empty column name")));
            }
            if self.covariate[..i].iter().any(|e| e.column == entry.column) {
                return Err(Error::Config(format!(
                    "column {:?} appears more than once",
                    entry.column
                )));
            }
            match entry.kind {
                ColumnKind::Categorical => {
                    if entry.weight.is_some() || entry.period.is_some() {
                        return Err(Error::Config(format!(
                            "categorical column {:?} must not carry weight or period",
                            entry.column
                        )));
                    }
                }
                ColumnKind::Numeric => {
                    if entry.weight.is_none() {
                        return Err(Error::Config(format!(
                            "numeric column {:?} needs a weight",
                            entry.column
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Build the premetric and the column order it expects. Categorical
    /// columns become the categorical coordinates (all hard mismatches) in
    /// listing order; numeric columns become the numeric coordinates.
    pub fn build(&self) -> Result<(ColumnLayout, PremetricSpec)> {
        self.check()?;
        let mut categorical_names = Vec::new();
        let mut numeric_names = Vec::new();
        let mut flags = Vec::new();
        let mut terms = Vec::new();
        for entry in &self.covariate {
            match entry.kind {
                ColumnKind::Categorical => {
                    categorical_names.push(entry.column.clone());
                    flags.push(true);
                }
                ColumnKind::Numeric => {
                    numeric_names.push(entry.column.clone());
                    let weight = entry.weight.expect("checked above");
                    terms.push(match entry.period {
                        Some(period) => NumericTerm::cyclic(weight, period),
                        None => NumericTerm::absolute(weight),
                    });
                }
            }
        }
        let spec = PremetricSpec::weighted(flags, terms)?;
        Ok((ColumnLayout { categorical: categorical_names, numeric: numeric_names }, spec))
    }

    /// Period of a numeric column, if configured.
    pub fn period_of(&self, column: &str) -> Option<f64> {
        self.covariate
            .iter()
            .find(|e| e.column == column)
            .and_then(|e| e.period)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariate::Covariate;

    const SAMPLE: &str = r#"
[[covariate]]
column = "vehicle"
kind = "categorical"

[[covariate]]
column = "age"
kind = "numeric"
weight = 0.1

[[covariate]]
column = "hour"
kind = "numeric"
weight = 0.30000000000000004
period = 24.0
"#;

    #[test]
    fn parse_then_build_matches_hand_construction() {
        let config = PremetricConfig::parse(SAMPLE).unwrap();
        let (layout, spec) = config.build().unwrap();
        assert_eq!(layout.categorical, vec!["vehicle"]);
        assert_eq!(layout.numeric, vec!["age", "hour"]);
        let s = Covariate::new(vec!["van".into()], vec![30.0, 23.0]);
        let t = Covariate::new(vec!["van".into()], vec![30.0, 1.0]);
        let d = spec.eval(&s, &t).unwrap();
        assert!((d - 0.30000000000000004 * 2.0).abs() <= 1e-12);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let config = PremetricConfig::parse(SAMPLE).unwrap();
        let rendered = config.render().unwrap();
        let reparsed = PremetricConfig::parse(&rendered).unwrap();
        assert_eq!(config, reparsed);
        for (a, b) in config.covariate.iter().zip(&reparsed.covariate) {
            assert_eq!(a.weight.map(f64::to_bits), b.weight.map(f64::to_bits));
            assert_eq!(a.period.map(f64::to_bits), b.period.map(f64::to_bits));
        }
        // Rendering is a fixed point.
        assert_eq!(rendered, reparsed.render().unwrap());
    }

    #[test]
    fn invalid_configurations_are_rejected() {
        let missing_weight = r#"
[[covariate]]
column = "age"
kind = "numeric"
"#;
        assert!(PremetricConfig::parse(missing_weight).is_err());

        let weighted_categorical = r#"
[[covariate]]
column = "vehicle"
kind = "categorical"
weight = 0.5
"#;
        assert!(PremetricConfig::parse(weighted_categorical).is_err());

        let duplicate = r#"
[[covariate]]
column = "age"
kind = "numeric"
weight = 0.1

[[covariate]]
column = "age"
kind = "numeric"
weight = 0.2
"#;
        assert!(PremetricConfig::parse(duplicate).is_err());

        let negative = r#"
[[covariate]]
column = "age"
kind = "numeric"
weight = -0.1
"#;
        let config = PremetricConfig::parse(negative).unwrap();
        assert!(config.build().is_err());
    }
}
