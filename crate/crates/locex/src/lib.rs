//! Statistical tools for locally exchangeable data.
//!
//! A stochastic process indexed by covariates is *locally exchangeable* when
//! swapping observations at nearby covariates changes the joint distribution
//! by a bounded amount: the total variation between the original and swapped
//! processes is at most the sum of premetric distances between each covariate
//! and its image. The zero premetric recovers classical exchangeability;
//! the 0/1 premetric on equivalence classes recovers partial exchangeability.
//!
//! This crate implements the statistical procedures that assumption buys:
//!
//! * [`premetric`] — declarative premetrics over typed covariates, axiom
//!   validation, block diameters, and sufficiency-defect bounds.
//! * [`empirical`] — local empirical measures with optimal simplex weights,
//!   point estimates, and finite-sample error bounds.
//! * [`randomization`] — local randomization tests with exact type-1 error
//!   control, both by full group enumeration and by subsampling with a
//!   Monte Carlo level correction, plus automatic construction of the
//!   within-block permutation group.
//! * [`dsc`] — estimation of the strong canonical premetric from repeated
//!   independent realizations over a finite observation alphabet.
//! * [`generators`] — seeded synthetic processes with known premetrics,
//!   used as ground truth by the test suite.
//!
//! All randomized procedures draw from splittable seed streams ([`rng`]) so
//! that results are bit-reproducible for a fixed master seed.

pub mod config;
pub mod covariate;
pub mod data;
pub mod dsc;
pub mod empirical;
pub mod error;
pub mod generators;
pub mod numeric;
pub mod partition;
pub mod premetric;
pub mod randomization;
pub mod rng;

pub use covariate::Covariate;
pub use data::{ObservationSet, Value};
pub use error::{Error, Result};
pub use partition::BlockPartition;
pub use premetric::PremetricSpec;
