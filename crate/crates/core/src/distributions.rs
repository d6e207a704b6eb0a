//! Rate distributions used to populate benchmarks and cost predictions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SamplerError};
use crate::sampler::RandomSource;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateDistribution {
    /// Density `1 / (max - min)` on [min, max].
    Uniform,
    /// Density `1 / (x ln(max / min))` on [min, max]; equal mass per decade.
    LogUniform,
}

impl RateDistribution {
    pub fn name(self) -> &'static str {
        match self {
            RateDistribution::Uniform => "uniform",
            RateDistribution::LogUniform => "loguniform",
        }
    }
}

impl fmt::Display for RateDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RateDistribution {
    type Err = SamplerError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(RateDistribution::Uniform),
            "loguniform" | "log-uniform" => Ok(RateDistribution::LogUniform),
            other => Err(SamplerError::InvalidParameter(format!(
                "unknown distribution {other:?}"
            ))),
        }
    }
}

/// A rate law on [min, max] with `0 < min <= max`.
///
/// `min == max` is accepted as the degenerate point mass at `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec<R> {
    kind: RateDistribution,
    min: R,
    max: R,
}

impl<R: Real> DistributionSpec<R> {
    pub fn new(kind: RateDistribution, min: R, max: R) -> Result<Self> {
        if !(min > R::zero() && max.is_finite() && min <= max) {
            return Err(SamplerError::InvalidParameter(format!(
                "need 0 < min <= max < inf, got min={min} max={max}"
            )));
        }
        Ok(Self { kind, min, max })
    }

    pub fn uniform(min: R, max: R) -> Result<Self> {
        Self::new(RateDistribution::Uniform, min, max)
    }

    pub fn log_uniform(min: R, max: R) -> Result<Self> {
        Self::new(RateDistribution::LogUniform, min, max)
    }

    /// Rate law on [ratio * max, max].
    pub fn from_ratio(kind: RateDistribution, ratio: R, max: R) -> Result<Self> {
        Self::new(kind, ratio * max, max)
    }

    pub fn kind(&self) -> RateDistribution {
        self.kind
    }

    pub fn min(&self) -> R {
        self.min
    }

    pub fn max(&self) -> R {
        self.max
    }

    /// `min / max`.
    pub fn ratio(&self) -> R {
        self.min / self.max
    }

    fn degenerate(&self) -> bool {
        self.min == self.max
    }

    pub fn sample<G: RandomSource + ?Sized>(&self, rng: &mut G) -> R {
        let u = R::lit(rng.next_unit());
        let x = match self.kind {
            RateDistribution::Uniform => self.min + u * (self.max - self.min),
            RateDistribution::LogUniform => (self.min.ln() + u * (self.max / self.min).ln()).exp(),
        };
        x.max(self.min).min(self.max)
    }

    /// Density at `x`; zero outside [min, max].
    pub fn pdf(&self, x: R) -> R {
        if x < self.min || x > self.max {
            return R::zero();
        }
        if self.degenerate() {
            return R::infinity();
        }
        match self.kind {
            RateDistribution::Uniform => R::one() / (self.max - self.min),
            RateDistribution::LogUniform => R::one() / (x * (self.max / self.min).ln()),
        }
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: R) -> R {
        if x < self.min {
            return R::zero();
        }
        if x >= self.max {
            return R::one();
        }
        match self.kind {
            RateDistribution::Uniform => (x - self.min) / (self.max - self.min),
            RateDistribution::LogUniform => (x / self.min).ln() / (self.max / self.min).ln(),
        }
    }

    /// Partial first moment `∫ t f(t) dt` over [min, min(x, max)].
    pub fn partial_moment(&self, x: R) -> R {
        if x < self.min {
            return R::zero();
        }
        let x = x.min(self.max);
        if self.degenerate() {
            return self.min;
        }
        match self.kind {
            RateDistribution::Uniform => {
                (x * x - self.min * self.min) / (R::lit(2.0) * (self.max - self.min))
            }
            RateDistribution::LogUniform => (x - self.min) / (self.max / self.min).ln(),
        }
    }

    /// `P(lo < X <= hi)`.
    pub fn mass(&self, lo: R, hi: R) -> R {
        self.cdf(hi) - self.cdf(lo)
    }

    /// `∫ t f(t) dt` over (lo, hi].
    pub fn moment(&self, lo: R, hi: R) -> R {
        self.partial_moment(hi) - self.partial_moment(lo)
    }

    pub fn mean(&self) -> R {
        self.partial_moment(self.max)
    }
}
