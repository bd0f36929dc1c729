//! Observation records and sets.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::covariate::Covariate;
use crate::error::{Error, Result};

/// An observation value: a symbol from a finite alphabet or a real number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Symbol(String),
    Real(f64),
}

impl Value {
    pub fn symbol(s: impl Into<String>) -> Self {
        Value::Symbol(s.into())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Symbol(s) => f.write_str(s),
            Value::Real(x) => write!(f, "{x}"),
        }
    }
}

/// Observations of a process at finitely many covariates, stored as parallel
/// covariate and value sequences.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservationSet {
    covariates: Vec<Covariate>,
    values: Vec<Value>,
}

impl ObservationSet {
    pub fn new(covariates: Vec<Covariate>, values: Vec<Value>) -> Result<Self> {
        if covariates.len() != values.len() {
            return Err(Error::DimensionMismatch {
                left: covariates.len(),
                right: values.len(),
            });
        }
        Ok(ObservationSet { covariates, values })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Covariate, Value)>) -> Self {
        let (covariates, values) = pairs.into_iter().unzip();
        ObservationSet { covariates, values }
    }

    pub fn push(&mut self, covariate: Covariate, value: Value) {
        self.covariates.push(covariate);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn covariates(&self) -> &[Covariate] {
        &self.covariates
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Covariate, &Value)> {
        self.covariates.iter().zip(self.values.iter())
    }
}
