//! Exact optimal transport and quantization for finitely supported measures.
//!
//! The crate provides four layers that build on each other:
//!
//! * [`measures`]: discrete probability measures, nearest-center projection,
//!   and pushforward (image) measures under that projection.
//! * [`transport`]: exact p-Wasserstein distances with sparse optimal
//!   transport plans, plus independent oracles (1-D quantile formula,
//!   permutation brute force, bipartite matching).
//! * [`quantization`]: Lloyd/k-means codebooks viewed as measure learners,
//!   and quantization-error estimation.
//! * [`samplers`] / [`rates`]: named population distributions with known
//!   intrinsic dimension and a Monte Carlo harness that fits empirical
//!   convergence-rate exponents.
//!
//! Everything is generic over the scalar type through [`scalar::Real`];
//! `f64` aliases are exported at the crate root.

pub mod error;
pub mod io;
pub mod measures;
pub mod quantization;
pub mod rates;
pub(crate) mod rng;
pub mod samplers;
pub mod scalar;
pub mod transport;

pub use error::{Error, Result};
pub use measures::{Codebook, DiscreteMeasure, Point};
pub use quantization::{kmeans_measure, lloyd, LloydConfig, QuantizerResult};
pub use rates::{run_rate_experiment, RateConfig, RateMode, RateResult};
pub use samplers::{DensityForm, MomentDescriptor, Sampler};
pub use scalar::Real;
pub use transport::{wasserstein, OTResult, PlanEntry, TransportPlan};

/// `f64` aliases for the common case.
pub type Point64 = measures::Point<f64>;
pub type Measure64 = measures::DiscreteMeasure<f64>;
pub type Codebook64 = measures::Codebook<f64>;

/// `f32` aliases for memory-constrained uses.
pub type Point32 = measures::Point<f32>;
pub type Measure32 = measures::DiscreteMeasure<f32>;
pub type Codebook32 = measures::Codebook<f32>;
