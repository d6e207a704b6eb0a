//! The contract shared by every backend.

use slotmap::new_key_type;

use crate::error::{InvariantViolation, Result, SamplerError};
use crate::scalar::Real;

new_key_type! {
    /// Stable identity of an outcome, issued by `add` and valid until `delete`.
    ///
    /// Internal relocations (swap-delete, leaf moves) never invalidate it.
    /// Using a handle after its outcome has been deleted yields
    /// [`SamplerError::StaleHandle`].
    pub struct OutcomeHandle;
}

/// Source of uniform draws used by `extract` and the rate generators.
///
/// Every [`rand::RngCore`] implements it, so seeded generators from the `rand`
/// ecosystem can be passed directly.
pub trait RandomSource {
    /// Uniform draw on [0, 1).
    fn next_unit(&mut self) -> f64;

    /// Uniform index on [0, bound). `bound` must be positive.
    fn next_index(&mut self, bound: usize) -> usize;

    /// Uniform draw on [0, bound) in the caller's scalar type.
    #[inline]
    fn next_below<R: Real>(&mut self, bound: R) -> R {
        R::unit_from(self.next_unit()) * bound
    }
}

impl<G: rand::RngCore + ?Sized> RandomSource for G {
    #[inline]
    fn next_unit(&mut self) -> f64 {
        rand::Rng::random::<f64>(self)
    }

    #[inline]
    fn next_index(&mut self, bound: usize) -> usize {
        rand::Rng::random_range(self, 0..bound)
    }
}

/// Work counters collected on the extraction path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtractStats {
    /// Candidates drawn by a rejection loop (1 for exact backends).
    pub attempts: u64,
    /// Groups passed over before the selected one (composition-rejection only).
    pub scan_steps: u64,
    /// Tree nodes visited from the root down to the selected leaf.
    pub node_visits: u64,
    /// Group the outcome was drawn from (composition-rejection only).
    pub group: Option<usize>,
}

/// Outcome returned by an extraction.
pub type Selected<'a, P> = (OutcomeHandle, &'a P);

/// Dynamic weighted selection over a set of outcomes.
///
/// Every outcome has a non-negative rate and `extract` returns outcome `i`
/// with probability `r_i / Σ r`. Outcomes with rate zero are never returned
/// and are not counted by [`len`](Sampler::len); whether they keep internal
/// storage is up to the backend.
pub trait Sampler<P, R: Real = f64> {
    /// Inserts an outcome and returns its handle.
    fn add(&mut self, payload: P, rate: R) -> Result<OutcomeHandle>;

    /// Changes the rate of an existing outcome. Rate zero makes it
    /// unselectable without invalidating the handle.
    fn update(&mut self, handle: OutcomeHandle, rate: R) -> Result<()>;

    /// Removes an outcome, returning its payload.
    fn delete(&mut self, handle: OutcomeHandle) -> Result<P>;

    /// Draws one outcome and reports the work it took.
    fn extract_with_stats<G: RandomSource + ?Sized>(
        &self,
        rng: &mut G,
    ) -> Result<(Selected<'_, P>, ExtractStats)>;

    /// Draws one outcome with probability proportional to its rate.
    #[inline]
    fn extract<G: RandomSource + ?Sized>(&self, rng: &mut G) -> Result<Selected<'_, P>> {
        self.extract_with_stats(rng).map(|(sel, _)| sel)
    }

    /// Sum of all rates.
    fn total_rate(&self) -> R;

    /// Number of outcomes with a positive rate.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Current rate of the outcome behind `handle`.
    fn rate(&self, handle: OutcomeHandle) -> Result<R>;

    fn payload(&self, handle: OutcomeHandle) -> Result<&P>;

    /// Full scan of the structural invariants. Linear time; meant for tests
    /// and debugging.
    fn check_invariants(&self) -> std::result::Result<(), InvariantViolation>;
}

/// Rejects NaN, infinite and negative rates.
#[inline]
pub fn validate_rate<R: Real>(rate: R) -> Result<R> {
    if rate.is_finite() && rate >= R::zero() {
        Ok(rate)
    } else {
        Err(SamplerError::InvalidRate(rate.as_f64()))
    }
}

/// Validates a rate against an upper ceiling as well.
#[inline]
pub(crate) fn validate_capped<R: Real>(rate: R, max: R) -> Result<R> {
    let rate = validate_rate(rate)?;
    if rate > max {
        return Err(SamplerError::RateExceedsMax {
            rate: rate.as_f64(),
            max: max.as_f64(),
        });
    }
    Ok(rate)
}

/// Whether two sums agree within `rel_tol`, relative to the larger magnitude.
pub(crate) fn close<R: Real>(a: R, b: R, rel_tol: f64) -> bool {
    let scale = a.abs().max(b.abs()).as_f64();
    (a - b).abs().as_f64() <= rel_tol * scale.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_pcg::Pcg64;

    #[test]
    fn rate_validation() {
        assert_eq!(validate_rate(0.0), Ok(0.0));
        assert_eq!(validate_rate(2.5f32), Ok(2.5));
        assert_eq!(validate_rate(-1.0), Err(SamplerError::InvalidRate(-1.0)));
        assert!(validate_rate(f64::NAN).is_err());
        assert!(validate_rate(f64::INFINITY).is_err());
        assert_eq!(
            validate_capped(1.5, 1.0),
            Err(SamplerError::RateExceedsMax { rate: 1.5, max: 1.0 })
        );
        assert_eq!(validate_capped(1.0, 1.0), Ok(1.0));
    }

    #[test]
    fn seeded_sources_repeat() {
        let mut a = Pcg64::seed_from_u64(7);
        let mut b = Pcg64::seed_from_u64(7);
        for _ in 0..100 {
            let (x, y) = (a.next_unit(), b.next_unit());
            assert_eq!(x, y);
            assert!((0.0..1.0).contains(&x));
            let i = a.next_index(13);
            assert_eq!(i, b.next_index(13));
            assert!(i < 13);
            assert!(a.next_below(3.0f64) < 3.0);
            b.next_below(3.0f64);
        }
    }
}
