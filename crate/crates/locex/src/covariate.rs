//! Typed covariates indexing the observations of a process.

use serde::{Deserialize, Serialize};

/// A covariate: a fixed-arity tuple of categorical labels and numeric
/// coordinates. The arity of both parts is set by the dataset schema and
/// must match the premetric used to compare covariates.
///
/// Replicated observations are represented by repeating the same covariate
/// tuple; any premetric assigns distance zero between exact duplicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariate {
    pub categorical: Vec<String>,
    pub numeric: Vec<f64>,
}

impl Covariate {
    pub fn new(categorical: Vec<String>, numeric: Vec<f64>) -> Self {
        Covariate { categorical, numeric }
    }

    /// A covariate with a single numeric coordinate and no categorical part.
    pub fn scalar(x: f64) -> Self {
        Covariate { categorical: Vec::new(), numeric: vec![x] }
    }

    /// First numeric coordinate, if any. Generators index one-dimensional
    /// processes by this coordinate.
    pub fn position(&self) -> Option<f64> {
        self.numeric.first().copied()
    }
}
