//! Dynamic weighted random selection.
//!
//! Three backends share the [`Sampler`] interface:
//!
//! * [`tree::SamplerTree`]: nearly-complete binary tree, O(log N) extract and
//!   update, exact.
//! * [`rejection::RejectionSampler`]: flat array with accept/reject against a
//!   fixed ceiling, O(1) update, expected extract cost set by the spread of
//!   the rates.
//! * [`composition::CrSampler`]: geometric rate bands with rejection inside
//!   each band.
//!
//! [`oracle::CumulativeSampler`] is a slow, exact reference. The
//! [`analytics`] module predicts the expected extraction cost of the
//! rejection-based backends for the rate laws in [`distributions`].
//!
//! All structures are generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases below fix it to `f64`.
//!
//! ```
//! use dynsample::{Sampler, TreeSampler};
//! use rand::SeedableRng;
//!
//! let mut tree = TreeSampler::new();
//! let a = tree.add("a", 1.0).unwrap();
//! tree.add("b", 3.0).unwrap();
//! tree.update(a, 2.0).unwrap();
//! let mut rng = rand::rngs::StdRng::seed_from_u64(1);
//! let (_, payload) = tree.extract(&mut rng).unwrap();
//! assert!(*payload == "a" || *payload == "b");
//! assert_eq!(tree.total_rate(), 5.0);
//! ```

pub mod analytics;
pub mod bands;
pub mod composition;
pub mod distributions;
pub mod error;
pub mod oracle;
pub mod rejection;
pub mod sampler;
pub mod scalar;
pub mod summation;
pub mod tree;

pub use bands::GeometricBands;
pub use composition::{CrSampler, RateGroup};
pub use distributions::{DistributionSpec, RateDistribution};
pub use error::{InvariantViolation, Result, SamplerError};
pub use oracle::{CumulativeArray, CumulativeSampler};
pub use rejection::{DrawMode, RejectionSampler, RejectionTable, DEFAULT_ATTEMPT_LIMIT};
pub use sampler::{validate_rate, ExtractStats, OutcomeHandle, RandomSource, Sampler, Selected};
pub use scalar::Real;
pub use tree::{NodeRef, SamplerTree};

pub type TreeSampler<P> = SamplerTree<P, f64>;
pub type TreeSamplerF32<P> = SamplerTree<P, f32>;
pub type Rejection<P> = RejectionSampler<P, f64>;
pub type RejectionF32<P> = RejectionSampler<P, f32>;
pub type CompositionRejection<P> = CrSampler<P, f64>;
pub type CompositionRejectionF32<P> = CrSampler<P, f32>;
pub type Reference<P> = CumulativeSampler<P, f64>;
pub type Spec = DistributionSpec<f64>;
pub type Cost = analytics::CostPrediction<f64>;
