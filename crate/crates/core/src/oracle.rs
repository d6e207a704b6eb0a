//! Cumulative-rate array: the static reference sampler.
//!
//! Every mutation rebuilds the prefix sums in O(N); extraction is a binary
//! search for the first prefix sum strictly greater than a draw on
//! [0, total). Slow to update, but exact and simple enough to serve as the
//! reference the dynamic backends are checked against.

use slotmap::SlotMap;

use crate::error::{ensure_invariant, InvariantViolation, Result, SamplerError};
use crate::sampler::{validate_rate, ExtractStats, OutcomeHandle, RandomSource, Sampler, Selected};
use crate::scalar::Real;

/// Prefix sums `A_i = r_0 + ... + r_i`, accumulated left to right.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CumulativeArray<R> {
    prefix: Vec<R>,
}

impl<R: Real> CumulativeArray<R> {
    pub fn rebuild<I: IntoIterator<Item = R>>(rates: I) -> Self {
        let mut acc = R::zero();
        let prefix = rates
            .into_iter()
            .map(|r| {
                acc = acc + r;
                acc
            })
            .collect();
        Self { prefix }
    }

    pub fn entries(&self) -> &[R] {
        &self.prefix
    }

    pub fn total(&self) -> R {
        self.prefix.last().copied().unwrap_or_else(R::zero)
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    /// Index of the first entry strictly greater than `draw`.
    ///
    /// A draw that rounding pushed to the total maps to the last entry with a
    /// positive rate, so zero-rate entries are never returned.
    pub fn select(&self, draw: R) -> Option<usize> {
        let i = self.prefix.partition_point(|&a| a <= draw);
        if i < self.prefix.len() {
            return Some(i);
        }
        (0..self.prefix.len()).rev().find(|&k| {
            let below = if k == 0 { R::zero() } else { self.prefix[k - 1] };
            self.prefix[k] > below
        })
    }

    /// Draws an index with probability proportional to its rate.
    pub fn extract<G: RandomSource + ?Sized>(&self, rng: &mut G) -> Result<usize> {
        let total = self.total();
        if total.is_nan() || total <= R::zero() {
            return Err(SamplerError::EmptyStructure);
        }
        self.select(rng.next_below(total))
            .ok_or(SamplerError::EmptyStructure)
    }
}

#[derive(Debug, Clone)]
struct Item<P, R> {
    handle: OutcomeHandle,
    payload: P,
    rate: R,
}

/// Reference sampler implementing [`Sampler`] by full rebuild on every
/// mutation.
#[derive(Debug, Clone)]
pub struct CumulativeSampler<P, R = f64> {
    items: Vec<Item<P, R>>,
    cumulative: CumulativeArray<R>,
    handles: SlotMap<OutcomeHandle, usize>,
    positive: usize,
}

impl<P, R: Real> Default for CumulativeSampler<P, R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P, R: Real> CumulativeSampler<P, R> {
    pub fn new() -> Self {
        Self {
            items: Vec::new(),
            cumulative: CumulativeArray::default(),
            handles: SlotMap::with_key(),
            positive: 0,
        }
    }

    /// Builds from `(payload, rate)` pairs; handles follow the input order.
    pub fn build<I>(items: I) -> Result<(Self, Vec<OutcomeHandle>)>
    where
        I: IntoIterator<Item = (P, R)>,
    {
        let mut sampler = Self::new();
        let mut handles = Vec::new();
        for (payload, rate) in items {
            let rate = validate_rate(rate)?;
            let handle = sampler.handles.insert(sampler.items.len());
            sampler.items.push(Item {
                handle,
                payload,
                rate,
            });
            handles.push(handle);
        }
        sampler.rebuild();
        Ok((sampler, handles))
    }

    pub fn cumulative(&self) -> &CumulativeArray<R> {
        &self.cumulative
    }

    /// Position of the outcome in the array.
    pub fn index_of(&self, handle: OutcomeHandle) -> Result<usize> {
        self.handles
            .get(handle)
            .copied()
            .ok_or(SamplerError::StaleHandle)
    }

    fn rebuild(&mut self) {
        self.cumulative = CumulativeArray::rebuild(self.items.iter().map(|it| it.rate));
        self.positive = self.items.iter().filter(|it| it.rate > R::zero()).count();
    }
}

impl<P, R: Real> Sampler<P, R> for CumulativeSampler<P, R> {
    fn add(&mut self, payload: P, rate: R) -> Result<OutcomeHandle> {
        let rate = validate_rate(rate)?;
        let handle = self.handles.insert(self.items.len());
        self.items.push(Item {
            handle,
            payload,
            rate,
        });
        self.rebuild();
        Ok(handle)
    }

    fn update(&mut self, handle: OutcomeHandle, rate: R) -> Result<()> {
        let rate = validate_rate(rate)?;
        let i = self.index_of(handle)?;
        self.items[i].rate = rate;
        self.rebuild();
        Ok(())
    }

    fn delete(&mut self, handle: OutcomeHandle) -> Result<P> {
        let i = self.handles.remove(handle).ok_or(SamplerError::StaleHandle)?;
        let removed = self.items.swap_remove(i);
        if let Some(moved) = self.items.get(i) {
            self.handles[moved.handle] = i;
        }
        self.rebuild();
        Ok(removed.payload)
    }

    fn extract_with_stats<G: RandomSource + ?Sized>(
        &self,
        rng: &mut G,
    ) -> Result<(Selected<'_, P>, ExtractStats)> {
        let i = self.cumulative.extract(rng)?;
        let item = &self.items[i];
        let stats = ExtractStats {
            attempts: 1,
            ..ExtractStats::default()
        };
        Ok(((item.handle, &item.payload), stats))
    }

    fn total_rate(&self) -> R {
        self.cumulative.total()
    }

    fn len(&self) -> usize {
        self.positive
    }

    fn rate(&self, handle: OutcomeHandle) -> Result<R> {
        self.index_of(handle).map(|i| self.items[i].rate)
    }

    fn payload(&self, handle: OutcomeHandle) -> Result<&P> {
        self.index_of(handle).map(|i| &self.items[i].payload)
    }

    fn check_invariants(&self) -> std::result::Result<(), InvariantViolation> {
        let prefix = self.cumulative.entries();
        ensure_invariant!(prefix.len() == self.items.len(), "prefix length mismatch");
        ensure_invariant!(
            prefix.windows(2).all(|w| w[0] <= w[1]),
            "prefix sums decrease"
        );
        for (i, item) in self.items.iter().enumerate() {
            ensure_invariant!(
                self.handles.get(item.handle) == Some(&i),
                "item {i} is not where its handle points"
            );
        }
        ensure_invariant!(self.handles.len() == self.items.len(), "dangling handles");
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_sums() {
        let a = CumulativeArray::rebuild([1.0, 2.0, 3.0]);
        assert_eq!(a.entries(), &[1.0, 3.0, 6.0]);
        assert_eq!(a.total(), 6.0);
    }

    #[test]
    fn empty_array() {
        let a = CumulativeArray::<f64>::rebuild([]);
        assert!(a.is_empty());
        let mut rng = rand::rng();
        assert_eq!(a.extract(&mut rng), Err(SamplerError::EmptyStructure));
    }

    #[test]
    fn strictly_greater_search() {
        let a = CumulativeArray::rebuild([1.0, 2.0, 3.0]);
        assert_eq!(a.select(0.999), Some(0));
        assert_eq!(a.select(1.0), Some(1));
        assert_eq!(a.select(0.0), Some(0));
        assert_eq!(a.select(5.999), Some(2));
    }

    #[test]
    fn zero_rates_are_skipped() {
        let a = CumulativeArray::rebuild([0.0, 2.0, 0.0]);
        assert_eq!(a.select(0.0), Some(1));
        assert_eq!(a.select(1.999), Some(1));
        // A draw equal to the total falls back to the last positive entry.
        assert_eq!(a.select(2.0), Some(1));
    }

    #[test]
    fn sampler_delete_keeps_handles() {
        let (mut s, hs) = CumulativeSampler::build([(0, 1.0), (1, 2.0), (2, 3.0)]).unwrap();
        s.delete(hs[0]).unwrap();
        assert_eq!(*s.payload(hs[2]).unwrap(), 2);
        assert_eq!(s.index_of(hs[2]).unwrap(), 0);
        assert_eq!(s.total_rate(), 5.0);
        s.update(hs[1], 0.0).unwrap();
        assert_eq!(s.len(), 1);
        s.check_invariants().unwrap();
    }
}
