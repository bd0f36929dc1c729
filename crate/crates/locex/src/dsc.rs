//! Estimation of the strong canonical premetric from repeated realizations.
//!
//! The strong canonical premetric `d_sc(t, t')` is the expected total
//! variation between the latent measures at two covariates. Given `N`
//! independent realizations of the process over a finite observation
//! alphabet, it is estimated by building a local empirical measure at `t`
//! and at `t'` within each realization (weights driven by a
//! practitioner-supplied premetric that dominates `d_sc`) and averaging the
//! total variation between the two across realizations.

use serde::Serialize;

use crate::covariate::Covariate;
use crate::data::{ObservationSet, Value};
use crate::empirical::{self, TestFunctionKind};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::premetric::PremetricSpec;

/// A finite, ordered set of observation symbols.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alphabet {
    symbols: Vec<Value>,
}

impl Alphabet {
    /// Collect the distinct values in first-appearance order.
    pub fn from_values<'a>(values: impl IntoIterator<Item = &'a Value>) -> Self {
        let mut symbols: Vec<Value> = Vec::new();
        for v in values {
            if !symbols.contains(v) {
                symbols.push(v.clone());
            }
        }
        Alphabet { symbols }
    }

    pub fn new(symbols: Vec<Value>) -> Result<Self> {
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::InvalidParameter(format!(
                    "alphabet symbol {s} is duplicated"
                )));
            }
        }
        Ok(Alphabet { symbols })
    }

    pub fn index_of(&self, v: &Value) -> Option<usize> {
        self.symbols.iter().position(|s| s == v)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Value] {
        &self.symbols
    }
}

/// A probability measure on a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteAlphabetMeasure {
    pub alphabet: Alphabet,
    pub mass: Vec<f64>,
}

impl FiniteAlphabetMeasure {
    pub fn new(alphabet: Alphabet, mass: Vec<f64>) -> Result<Self> {
        if alphabet.len() != mass.len() {
            return Err(Error::DimensionMismatch { left: alphabet.len(), right: mass.len() });
        }
        if mass.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::InvalidParameter("mass entries must be finite and >= 0".into()));
        }
        let total: f64 = crate::numeric::sum(&mass);
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "mass sums to {total}, expected 1 within 1e-12"
            )));
        }
        Ok(FiniteAlphabetMeasure { alphabet, mass })
    }
}

/// Total variation distance between two measures on the same alphabet:
/// half the L1 distance between their mass vectors.
pub fn tv_discrete(a: &FiniteAlphabetMeasure, b: &FiniteAlphabetMeasure) -> Result<f64> {
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    Ok(0.5 * a.mass.iter().zip(&b.mass).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// Collapse a local empirical measure onto an alphabet: atoms with equal
/// symbols merge by weight addition.
pub fn collapse_measure(
    measure: &empirical::LocalEmpiricalMeasure,
    alphabet: &Alphabet,
) -> Result<FiniteAlphabetMeasure> {
    let mut mass = vec![0.0; alphabet.len()];
    for atom in measure.nonzero_atoms() {
        let idx = alphabet
            .index_of(&atom.value)
            .ok_or_else(|| Error::UnknownSymbol(atom.value.to_string()))?;
        mass[idx] += atom.weight;
    }
    FiniteAlphabetMeasure::new(alphabet.clone(), mass)
}

/// Independent realizations of the process, each a full observation set.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationBundle {
    realizations: Vec<ObservationSet>,
}

impl RealizationBundle {
    /// Validates that every realization is nonempty and that covariate
    /// arities agree across realizations.
    pub fn new(realizations: Vec<ObservationSet>) -> Result<Self> {
        if realizations.is_empty() {
            return Err(Error::EmptyInput("a realization bundle needs at least one realization"));
        }
        let mut arity: Option<(usize, usize)> = None;
        for r in &realizations {
            if r.is_empty() {
                return Err(Error::EmptyInput("realizations must be nonempty"));
            }
            let c = &r.covariates()[0];
            let this = (c.categorical.len(), c.numeric.len());
            for cov in r.covariates() {
                if (cov.categorical.len(), cov.numeric.len()) != this {
                    return Err(Error::SchemaMismatch(
                        "covariate arities differ within a realization".into(),
                    ));
                }
            }
            match arity {
                None => arity = Some(this),
                Some(a) if a != this => {
                    return Err(Error::SchemaMismatch(
                        "covariate arities differ across realizations".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(RealizationBundle { realizations })
    }

    pub fn realizations(&self) -> &[ObservationSet] {
        &self.realizations
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    /// Alphabet of all values seen anywhere in the bundle, in
    /// first-appearance order.
    pub fn alphabet(&self) -> Alphabet {
        Alphabet::from_values(self.realizations.iter().flat_map(|r| r.values()))
    }
}

/// Point estimate of the strong canonical premetric between two covariates.
#[derive(Debug, Clone, Serialize)]
pub struct DscEstimate {
    pub estimate: f64,
    pub n_realizations: usize,
    pub alphabet_size: usize,
    /// Diagnostic: the worst (over realizations) distance from the
    /// realization's covariates to the query pair under the supplied
    /// premetric. Consistency needs this to shrink as realizations densify;
    /// it cannot be asserted from a fixed bundle, only reported.
    pub max_min_distance: f64,
}

/// Estimate `d_sc(t, t')` by averaging, over realizations, the total
/// variation between the local empirical measures at `t` and `t'`. The
/// weights use the supplied premetric directly as the bias coefficient.
/// The estimate is exactly symmetric in `(t, t')` and exactly zero when
/// `t == t'`.
///
/// Observations must be symbols: the estimator is defined on a finite
/// alphabet, and real-valued observations (each one distinct) would make
/// the per-realization total variations saturate meaninglessly. Quantize
/// continuous observations first.
pub fn estimate_dsc(
    bundle: &RealizationBundle,
    t: &Covariate,
    t_prime: &Covariate,
    ell: &PremetricSpec,
) -> Result<DscEstimate> {
    for realization in bundle.realizations() {
        if let Some(real) = realization.values().iter().find(|v| matches!(v, Value::Real(_)))
        {
            return Err(Error::InvalidParameter(format!(
                "estimate_dsc needs a finite observation alphabet; found the real value \
                 {real} (quantize continuous observations first)"
            )));
        }
    }
    let alphabet = bundle.alphabet();
    let mut mean = CompensatedSum::new();
    let mut worst = 0.0f64;
    for realization in bundle.realizations() {
        let tv = realization_tv(realization, t, t_prime, ell, &alphabet)?;
        mean.add(tv);

        let mut nearest_t = f64::INFINITY;
        let mut nearest_tp = f64::INFINITY;
        for cov in realization.covariates() {
            nearest_t = nearest_t.min(ell.eval(cov, t)?);
            nearest_tp = nearest_tp.min(ell.eval(cov, t_prime)?);
        }
        worst = worst.max(nearest_t.max(nearest_tp));
    }
    Ok(DscEstimate {
        estimate: mean.value() / bundle.len() as f64,
        n_realizations: bundle.len(),
        alphabet_size: alphabet.len(),
        max_min_distance: worst,
    })
}

/// Total variation between the two within-realization local empirical
/// measures, on the shared alphabet.
fn realization_tv(
    realization: &ObservationSet,
    t: &Covariate,
    t_prime: &Covariate,
    ell: &PremetricSpec,
    alphabet: &Alphabet,
) -> Result<f64> {
    let m_t = measure_on_alphabet(realization, t, ell, alphabet)?;
    let m_tp = measure_on_alphabet(realization, t_prime, ell, alphabet)?;
    tv_discrete(&m_t, &m_tp)
}

fn measure_on_alphabet(
    realization: &ObservationSet,
    query: &Covariate,
    ell: &PremetricSpec,
    alphabet: &Alphabet,
) -> Result<FiniteAlphabetMeasure> {
    let qw = empirical::query_weights(
        realization.covariates(),
        query,
        ell,
        TestFunctionKind::Indicator,
    )?;
    let mut mass = vec![0.0; alphabet.len()];
    for (&w, value) in qw.weights.iter().zip(realization.values()) {
        if w > 0.0 {
            let idx = alphabet
                .index_of(value)
                .ok_or_else(|| Error::UnknownSymbol(value.to_string()))?;
            mass[idx] += w;
        }
    }
    FiniteAlphabetMeasure::new(alphabet.clone(), mass)
}
