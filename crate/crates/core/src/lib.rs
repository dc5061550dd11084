//! Minimax and adaptive estimation of a linear functional `η⊤θ` of a sparse
//! mean vector observed in sub-Weibull noise.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerics:
//!
//! - [`loading`]: validated, sorted loading vectors and the generated example families.
//! - [`threshold`]: log-domain threshold objectives and monotone root finding.
//! - [`rates`]: oracle and adaptive rate profiles, cutoff indices, closed forms.
//! - [`noise`]: unit-variance noise families with deterministic seeded sampling.
//! - [`estimators`]: thresholding estimators, Lepski selection, median-of-means, the linear test.
//! - [`lowerbound`]: the random-sparsity least-favorable prior and its χ² bound.
//!
//! IO, configuration, the Monte Carlo harness and the command line live in the
//! `sparsefn` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
pub mod estimators;
pub mod loading;
pub mod lowerbound;
pub mod math;
pub mod noise;
pub mod rates;
pub mod rng;
pub mod threshold;

pub use error::{Error, Result};
pub use loading::{LoadingSpec, LoadingVector};
pub use noise::{NoiseClass, NoiseFamily, NoiseModel};
pub use rates::{AdaptiveRateProfile, AdaptiveRates, RateProfile};
pub use threshold::{ThresholdSolution, Tolerances};
