//! Seeded synthetic generators of locally exchangeable processes.
//!
//! Each generator comes with a premetric under which its output is locally
//! exchangeable, making it a ground-truth factory for the estimation and
//! testing machinery. Generators index one-dimensional processes by the
//! first numeric coordinate of each covariate; duplicate covariates are
//! replicates. One call produces one realization; batch generation derives
//! an independent substream per realization from the master seed, so
//! realizations can be produced in any order with bit-identical results.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::covariate::Covariate;
use crate::data::{ObservationSet, Value};
use crate::dsc::{tv_discrete, Alphabet, FiniteAlphabetMeasure, RealizationBundle};
use crate::error::{Error, Result};
use crate::premetric::PremetricSpec;
use crate::rng;

/// Uniform quantizer onto a finite alphabet of bin-index symbols. Values
/// below `lo` fall in the first bin, values at or above `hi` in the last.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Quantizer {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo < hi) || bins == 0 {
            return Err(Error::InvalidParameter(format!(
                "quantizer needs lo < hi and bins >= 1, got [{lo}, {hi}) with {bins} bins"
            )));
        }
        Ok(Quantizer { lo, hi, bins })
    }

    pub fn apply(&self, x: f64) -> Value {
        let scaled = (x - self.lo) / (self.hi - self.lo) * self.bins as f64;
        let idx = (scaled.floor() as i64).clamp(0, self.bins as i64 - 1);
        Value::Symbol(idx.to_string())
    }
}

/// Which synthetic process to draw, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Independent draws from a fixed mass vector; exchangeable, so the
    /// matching premetric is identically zero.
    Iid { mass: Vec<f64> },
    /// A single latent threshold U ~ Unif[0, 1]; the observation at
    /// position x is "1" when x >= U, else "0".
    Jump,
    /// Unit-period square wave shifted by U ~ Unif[0, 1]; emits "+1"/"-1".
    SquareWave,
    /// A latent threshold U; observations draw from `mass_before` at
    /// positions below U and `mass_after` at or above it.
    SwitchingMixture { mass_before: Vec<f64>, mass_after: Vec<f64> },
    /// Latent Gaussian with a radial-basis kernel plus independent noise.
    /// Replicates at the same position share the latent value.
    LatentGaussian {
        kernel_width: f64,
        noise_variance: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quantizer: Option<Quantizer>,
    },
}

/// A generator with its master seed. Identical specs (seed included)
/// produce identical output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub seed: u64,
}

impl GeneratorKind {
    /// The premetric under which this generator's output is locally
    /// exchangeable, over covariates with one numeric coordinate.
    ///
    /// The square wave has two sign edges per period, so a position shift
    /// of `h` flips each observation with probability `2h`; its premetric
    /// is `min(1, 2|x - x'|)`, twice the jump process's.
    pub fn matching_premetric(&self) -> Result<PremetricSpec> {
        let weight = match self {
            GeneratorKind::Iid { .. } => 0.0,
            GeneratorKind::Jump => 1.0,
            GeneratorKind::SquareWave => 2.0,
            GeneratorKind::SwitchingMixture { mass_before, mass_after } => {
                mass_tv(mass_before, mass_after)?
            }
            GeneratorKind::LatentGaussian { kernel_width, noise_variance, .. } => {
                1.0 / (kernel_width * (noise_variance * std::f64::consts::PI).sqrt())
            }
        };
        PremetricSpec::scalar_absolute(weight)
    }
}

impl GeneratorSpec {
    /// One realization, drawn from substream `index` of the master seed.
    pub fn generate_one(&self, covariates: &[Covariate], index: u64) -> Result<ObservationSet> {
        let seed = rng::derive(self.seed, index);
        match &self.kind {
            GeneratorKind::Iid { mass } => gen_iid(mass, covariates, seed),
            GeneratorKind::Jump => gen_jump(covariates, seed),
            GeneratorKind::SquareWave => gen_square_wave(covariates, seed),
            GeneratorKind::SwitchingMixture { mass_before, mass_after } => {
                gen_switching_mixture(mass_before, mass_after, covariates, seed)
            }
            GeneratorKind::LatentGaussian { kernel_width, noise_variance, quantizer } => {
                gen_latent_gaussian(
                    *kernel_width,
                    *noise_variance,
                    covariates,
                    seed,
                    quantizer.as_ref(),
                )
            }
        }
    }

    /// A bundle of independent realizations.
    pub fn generate(
        &self,
        covariates: &[Covariate],
        n_realizations: usize,
    ) -> Result<RealizationBundle> {
        let realizations = (0..n_realizations as u64)
            .map(|r| self.generate_one(covariates, r))
            .collect::<Result<Vec<_>>>()?;
        RealizationBundle::new(realizations)
    }
}

/// Total variation between two mass vectors on a shared index alphabet.
fn mass_tv(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    let alphabet = index_alphabet(a.len());
    let ma = FiniteAlphabetMeasure::new(alphabet.clone(), a.to_vec())?;
    let mb = FiniteAlphabetMeasure::new(alphabet, b.to_vec())?;
    tv_discrete(&ma, &mb)
}

/// Alphabet of index-named symbols "0", "1", ...
fn index_alphabet(len: usize) -> Alphabet {
    Alphabet::from_values(
        (0..len)
            .map(|i| Value::Symbol(i.to_string()))
            .collect::<Vec<_>>()
            .iter(),
    )
}

fn validate_mass(mass: &[f64]) -> Result<()> {
    if mass.is_empty() {
        return Err(Error::EmptyInput("mass vector must be nonempty"));
    }
    if mass.iter().any(|&m| !m.is_finite() || m < 0.0) {
        return Err(Error::InvalidParameter("mass entries must be finite and >= 0".into()));
    }
    let total: f64 = crate::numeric::sum(mass);
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "mass sums to {total}, expected 1 within 1e-12"
        )));
    }
    Ok(())
}

fn positions(covariates: &[Covariate]) -> Result<Vec<f64>> {
    covariates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            c.position().ok_or_else(|| {
                Error::SchemaMismatch(format!(
                    "covariate {i} has no numeric coordinate to index the process"
                ))
            })
        })
        .collect()
}

fn unit_interval_positions(covariates: &[Covariate]) -> Result<Vec<f64>> {
    let xs = positions(covariates)?;
    for (i, &x) in xs.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!(
                "covariate {i} is at {x}, outside [0, 1]"
            )));
        }
    }
    Ok(xs)
}

/// Inverse-CDF draw of a symbol index from a mass vector.
fn sample_symbol(mass: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    for (i, &m) in mass.iter().enumerate() {
        cum += m;
        if u < cum {
            return i;
        }
    }
    mass.len() - 1
}

/// Independent draws from a fixed mass vector at every covariate.
pub fn gen_iid(mass: &[f64], covariates: &[Covariate], seed: u64) -> Result<ObservationSet> {
    validate_mass(mass)?;
    let mut rng = rng::stream(seed);
    let values = covariates
        .iter()
        .map(|_| Value::Symbol(sample_symbol(mass, rng.random()).to_string()))
        .collect();
    ObservationSet::new(covariates.to_vec(), values)
}

/// Jump process on [0, 1], also returning the latent threshold for use as
/// a per-realization oracle.
pub fn gen_jump_with_latent(
    covariates: &[Covariate],
    seed: u64,
) -> Result<(ObservationSet, f64)> {
    let xs = unit_interval_positions(covariates)?;
    let mut rng = rng::stream(seed);
    let u: f64 = rng.random();
    let values = xs
        .iter()
        .map(|&x| Value::symbol(if x >= u { "1" } else { "0" }))
        .collect();
    Ok((ObservationSet::new(covariates.to_vec(), values)?, u))
}

/// Jump process: a single uniform threshold U, observation "1" iff x >= U.
pub fn gen_jump(covariates: &[Covariate], seed: u64) -> Result<ObservationSet> {
    gen_jump_with_latent(covariates, seed).map(|(obs, _)| obs)
}

/// Square wave of period one shifted by a uniform phase. The sign at phase
/// zero (and at the half-period crossing) is fixed to "+1" so the output is
/// a deterministic function of the draw.
pub fn gen_square_wave(covariates: &[Covariate], seed: u64) -> Result<ObservationSet> {
    let xs = positions(covariates)?;
    let mut rng = rng::stream(seed);
    let u: f64 = rng.random();
    let values = xs
        .iter()
        .map(|&x| {
            let phase = (x - u).rem_euclid(1.0);
            Value::symbol(if phase <= 0.5 { "+1" } else { "-1" })
        })
        .collect();
    ObservationSet::new(covariates.to_vec(), values)
}

/// Switching mixture with its latent threshold.
pub fn gen_switching_mixture_with_latent(
    mass_before: &[f64],
    mass_after: &[f64],
    covariates: &[Covariate],
    seed: u64,
) -> Result<(ObservationSet, f64)> {
    validate_mass(mass_before)?;
    validate_mass(mass_after)?;
    if mass_before.len() != mass_after.len() {
        return Err(Error::DimensionMismatch {
            left: mass_before.len(),
            right: mass_after.len(),
        });
    }
    let xs = unit_interval_positions(covariates)?;
    let mut rng = rng::stream(seed);
    let u: f64 = rng.random();
    let values = xs
        .iter()
        .map(|&x| {
            let mass = if x < u { mass_before } else { mass_after };
            Value::Symbol(sample_symbol(mass, rng.random()).to_string())
        })
        .collect();
    Ok((ObservationSet::new(covariates.to_vec(), values)?, u))
}

/// Switching mixture on [0, 1]: draws from `mass_before` below a uniform
/// threshold and from `mass_after` at or above it. With point masses at
/// "0" and "1" this is exactly the jump process.
pub fn gen_switching_mixture(
    mass_before: &[f64],
    mass_after: &[f64],
    covariates: &[Covariate],
    seed: u64,
) -> Result<ObservationSet> {
    gen_switching_mixture_with_latent(mass_before, mass_after, covariates, seed)
        .map(|(obs, _)| obs)
}

/// Expected total variation between the latent measures of the switching
/// mixture at two positions: `|x - x'| * tv(mass_before, mass_after)`.
pub fn switching_dsc(
    mass_before: &[f64],
    mass_after: &[f64],
    x: f64,
    x_prime: f64,
) -> Result<f64> {
    Ok((x - x_prime).abs() * mass_tv(mass_before, mass_after)?)
}

const COVARIANCE_JITTER: f64 = 1e-10;
const MAX_GAUSSIAN_COVARIATES: usize = 2000;

/// Latent Gaussian process with radial-basis covariance
/// `exp(-(x - x')^2 / (2 w^2))` plus independent observation noise.
/// Replicates at exactly equal positions share the latent draw. An optional
/// quantizer maps each observation to a finite alphabet; as a deterministic
/// per-observation map it leaves the matching premetric unchanged.
pub fn gen_latent_gaussian(
    kernel_width: f64,
    noise_variance: f64,
    covariates: &[Covariate],
    seed: u64,
    quantizer: Option<&Quantizer>,
) -> Result<ObservationSet> {
    if !(kernel_width > 0.0) || !(noise_variance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel width and noise variance must be > 0, got {kernel_width} and {noise_variance}"
        )));
    }
    if covariates.len() > MAX_GAUSSIAN_COVARIATES {
        return Err(Error::InvalidParameter(format!(
            "{} covariates exceed the dense factorization limit of {MAX_GAUSSIAN_COVARIATES}",
            covariates.len()
        )));
    }
    let xs = positions(covariates)?;

    // Distinct positions in first-appearance order; replicates share index.
    let mut distinct: Vec<f64> = Vec::new();
    let mut loc_index = Vec::with_capacity(xs.len());
    for &x in &xs {
        match distinct.iter().position(|&d| d == x) {
            Some(i) => loc_index.push(i),
            None => {
                distinct.push(x);
                loc_index.push(distinct.len() - 1);
            }
        }
    }

    let m = distinct.len();
    let mut cov = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for j in 0..m {
            let gap = distinct[i] - distinct[j];
            cov[i][j] = (-gap * gap / (2.0 * kernel_width * kernel_width)).exp();
        }
        cov[i][i] += COVARIANCE_JITTER;
    }
    let chol = cholesky_lower(cov)?;

    let mut rng = rng::stream(seed);
    let standard: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let latent: Vec<f64> = (0..m)
        .map(|i| (0..=i).map(|k| chol[i][k] * standard[k]).sum())
        .collect();

    let noise_sd = noise_variance.sqrt();
    let values = loc_index
        .iter()
        .map(|&loc| {
            let x = latent[loc] + noise_sd * rng.sample::<f64, _>(StandardNormal);
            match quantizer {
                Some(q) => q.apply(x),
                None => Value::Real(x),
            }
        })
        .collect();
    ObservationSet::new(covariates.to_vec(), values)
}

/// In-place lower Cholesky factor; errors on a non-positive pivot.
fn cholesky_lower(mut a: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    for j in 0..n {
        for k in 0..j {
            a[j][j] -= a[j][k] * a[j][k];
        }
        if a[j][j] <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        a[j][j] = a[j][j].sqrt();
        for i in (j + 1)..n {
            for k in 0..j {
                a[i][j] -= a[i][k] * a[j][k];
            }
            a[i][j] /= a[j][j];
        }
        for i in 0..j {
            a[i][j] = 0.0;
        }
    }
    Ok(a)
}
