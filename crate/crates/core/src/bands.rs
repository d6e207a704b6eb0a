use crate::error::{Result, SamplerError};
use crate::sampler::validate_capped;
use crate::scalar::Real;

/// Geometric partition of (0, max] into bands (max/c^(i+1), max/c^i].
///
/// The band predicate is the source of truth; the logarithmic index formula
/// only provides a starting guess that is corrected onto the predicate, so
/// exact boundary rates such as `max / c` land in the band whose upper end
/// they are.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricBands<R> {
    max: R,
    c: R,
    ln_c: R,
}

impl<R: Real> GeometricBands<R> {
    pub fn new(max: R, c: R) -> Result<Self> {
        if !(max.is_finite() && max > R::zero()) {
            return Err(SamplerError::InvalidParameter(format!(
                "band ceiling must be positive and finite, got {max}"
            )));
        }
        if !(c.is_finite() && c > R::one()) {
            return Err(SamplerError::InvalidParameter(format!(
                "group constant must be finite and > 1, got {c}"
            )));
        }
        Ok(Self {
            max,
            c,
            ln_c: c.ln(),
        })
    }

    pub fn max(&self) -> R {
        self.max
    }

    pub fn c(&self) -> R {
        self.c
    }

    /// Upper (inclusive) end of band `i`, `max / c^i`.
    pub fn upper(&self, i: usize) -> R {
        let exp = i32::try_from(i).unwrap_or(i32::MAX);
        self.max / self.c.powi(exp)
    }

    /// Lower (exclusive) end of band `i`.
    pub fn lower(&self, i: usize) -> R {
        self.upper(i + 1)
    }

    pub fn contains(&self, i: usize, rate: R) -> bool {
        self.lower(i) < rate && rate <= self.upper(i)
    }

    /// Band holding `rate`, which must lie in (0, max].
    pub fn index_of(&self, rate: R) -> Result<usize> {
        let rate = validate_capped(rate, self.max)?;
        if rate <= R::zero() {
            return Err(SamplerError::InvalidRate(rate.as_f64()));
        }
        let guess = ((self.max / rate).ln() / self.ln_c).floor();
        let mut i = guess.to_usize().unwrap_or(0);
        while i > 0 && rate > self.upper(i) {
            i -= 1;
        }
        while rate <= self.lower(i) {
            i += 1;
        }
        Ok(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn top_rate_is_band_zero() {
        let b = GeometricBands::new(3.0, 2.0).unwrap();
        assert_eq!(b.index_of(3.0).unwrap(), 0);
    }

    #[test]
    fn formula_examples() {
        // floor(log10(100 / 5)) = floor(log10 20) = 1
        assert_eq!(GeometricBands::new(100.0, 10.0).unwrap().index_of(5.0).unwrap(), 1);
        // floor(ln(1 / 0.05)) = floor(ln 20) = 2
        assert_eq!(GeometricBands::new(1.0, E).unwrap().index_of(0.05).unwrap(), 2);
    }

    #[test]
    fn exact_boundaries_belong_to_the_upper_band() {
        let b = GeometricBands::new(1.0, 10.0).unwrap();
        assert_eq!(b.index_of(0.1).unwrap(), 1);
        assert_eq!(b.index_of(0.001).unwrap(), 3);
        let b = GeometricBands::new(1.0, 2.0).unwrap();
        assert_eq!(b.index_of(0.5).unwrap(), 1);
        assert_eq!(b.index_of(0.25).unwrap(), 2);
    }

    #[test]
    fn errors() {
        let b = GeometricBands::new(1.0, 2.0).unwrap();
        assert!(matches!(b.index_of(0.0), Err(SamplerError::InvalidRate(_))));
        assert!(matches!(b.index_of(-1.0), Err(SamplerError::InvalidRate(_))));
        assert!(matches!(b.index_of(2.0), Err(SamplerError::RateExceedsMax { .. })));
        assert!(GeometricBands::new(1.0, 1.0).is_err());
        assert!(GeometricBands::new(-1.0, 2.0).is_err());
    }

    #[test]
    fn tiny_rates_get_deep_bands() {
        let b = GeometricBands::new(1.0, 2.0).unwrap();
        let i = b.index_of(1e-300).unwrap();
        assert!(b.contains(i, 1e-300));
        let i = b.index_of(f64::MIN_POSITIVE / 4.0).unwrap();
        assert!(b.contains(i, f64::MIN_POSITIVE / 4.0));
    }
}
