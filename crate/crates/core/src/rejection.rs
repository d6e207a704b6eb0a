//! Rejection sampler over a flat array.
//!
//! Extraction picks a uniform position and accepts it with probability
//! `rate / max_rate`, repeating until acceptance. Add, update and delete are
//! O(1); the expected number of attempts depends only on the distribution of
//! rates relative to the ceiling, never on the number of outcomes.

use slotmap::SlotMap;

use crate::error::{ensure_invariant, InvariantViolation, Result, SamplerError};
use crate::sampler::{
    close, validate_capped, validate_rate, ExtractStats, OutcomeHandle, RandomSource, Sampler,
    Selected,
};
use crate::scalar::Real;
use crate::summation::CompensatedSum;

/// Attempt cap used when none is configured.
pub const DEFAULT_ATTEMPT_LIMIT: u64 = 10_000_000;

/// An entry taken out of a [`RejectionTable`].
#[derive(Debug, Clone)]
pub(crate) struct Removed<P, R> {
    pub(crate) payload: P,
    pub(crate) rate: R,
}

/// Where a handle currently lives. Zero-rate outcomes are parked outside the
/// dense arrays so they cost nothing at extraction.
#[derive(Debug, Clone)]
pub(crate) enum Residence<L, P> {
    Live(L),
    Dormant(P),
}

/// How an extraction draws its index and acceptance threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DrawMode {
    /// One draw for the index and an independent one for the threshold.
    #[default]
    Independent,
    /// One draw per attempt: the integer part of `u * N` is the index and the
    /// fractional part scaled by the ceiling is the threshold. Faster, but
    /// index and threshold share bits and lose resolution as `N` grows.
    SplitSingle,
}

/// Dense array of `(payload, rate)` entries with swap-delete.
///
/// Position `k` is the entry's id; callers that hold positions are told
/// which entry moved on removal. Rates live in their own array so the
/// rejection loop reads nothing else.
#[derive(Debug, Clone)]
pub struct RejectionTable<P, R> {
    rates: Vec<R>,
    slots: Vec<(OutcomeHandle, P)>,
}

impl<P, R> Default for RejectionTable<P, R> {
    fn default() -> Self {
        Self {
            rates: Vec::new(),
            slots: Vec::new(),
        }
    }
}

impl<P, R: Real> RejectionTable<P, R> {
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Index of the last live entry.
    pub fn last(&self) -> Option<usize> {
        self.rates.len().checked_sub(1)
    }

    pub(crate) fn push(&mut self, handle: OutcomeHandle, payload: P, rate: R) -> usize {
        self.rates.push(rate);
        self.slots.push((handle, payload));
        self.rates.len() - 1
    }

    /// Overwrites position `pos` with the last entry. Returns the removed
    /// entry and the handle now living at `pos`, if one moved.
    pub(crate) fn swap_remove(&mut self, pos: usize) -> (Removed<P, R>, Option<OutcomeHandle>) {
        let rate = self.rates.swap_remove(pos);
        let (_, payload) = self.slots.swap_remove(pos);
        let moved = self.slots.get(pos).map(|s| s.0);
        (Removed { payload, rate }, moved)
    }

    pub(crate) fn rate(&self, pos: usize) -> R {
        self.rates[pos]
    }

    /// Sets the rate at `pos` and returns the old one.
    pub(crate) fn set_rate(&mut self, pos: usize, rate: R) -> R {
        std::mem::replace(&mut self.rates[pos], rate)
    }

    pub(crate) fn handle(&self, pos: usize) -> OutcomeHandle {
        self.slots[pos].0
    }

    pub(crate) fn payload(&self, pos: usize) -> &P {
        &self.slots[pos].1
    }

    /// `(handle, rate)` pairs in position order.
    pub(crate) fn iter(&self) -> impl Iterator<Item = (OutcomeHandle, R)> + '_ {
        self.slots.iter().map(|s| s.0).zip(self.rates.iter().copied())
    }

    /// Rates in position order.
    pub fn rates(&self) -> impl Iterator<Item = R> + '_ {
        self.rates.iter().copied()
    }

    /// Runs the accept/reject loop against `ceiling`. Returns the accepted
    /// position and the number of attempts.
    pub(crate) fn sample<G: RandomSource + ?Sized>(
        &self,
        rng: &mut G,
        ceiling: R,
        limit: u64,
        mode: DrawMode,
    ) -> Result<(usize, u64)> {
        let n = self.rates.len();
        if n == 0 {
            return Err(SamplerError::EmptyStructure);
        }
        let mut attempts = 0;
        while attempts < limit {
            attempts += 1;
            let (pos, threshold) = match mode {
                DrawMode::Independent => {
                    let pos = rng.next_index(n);
                    (pos, rng.next_below(ceiling))
                }
                DrawMode::SplitSingle => {
                    let scaled = rng.next_unit() * n as f64;
                    let pos = (scaled as usize).min(n - 1);
                    (pos, R::unit_from(scaled - pos as f64) * ceiling)
                }
            };
            if self.rates[pos] >= threshold {
                return Ok((pos, attempts));
            }
        }
        Err(SamplerError::AttemptLimitExceeded(limit))
    }
}

/// Rejection sampler with a fixed rate ceiling.
#[derive(Debug, Clone)]
pub struct RejectionSampler<P, R = f64> {
    table: RejectionTable<P, R>,
    handles: SlotMap<OutcomeHandle, Residence<usize, P>>,
    max_rate: R,
    total: CompensatedSum<R>,
    attempt_limit: u64,
    mode: DrawMode,
}

impl<P, R: Real> RejectionSampler<P, R> {
    /// Creates an empty sampler accepting rates up to `max_rate`.
    pub fn new(max_rate: R) -> Result<Self> {
        if !(max_rate.is_finite() && max_rate > R::zero()) {
            return Err(SamplerError::InvalidParameter(format!(
                "max_rate must be positive and finite, got {max_rate}"
            )));
        }
        Ok(Self {
            table: RejectionTable::default(),
            handles: SlotMap::with_key(),
            max_rate,
            total: CompensatedSum::new(),
            attempt_limit: DEFAULT_ATTEMPT_LIMIT,
            mode: DrawMode::Independent,
        })
    }

    pub fn with_attempt_limit(mut self, limit: u64) -> Self {
        self.attempt_limit = limit.max(1);
        self
    }

    pub fn with_draw_mode(mut self, mode: DrawMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn max_rate(&self) -> R {
        self.max_rate
    }

    pub fn attempt_limit(&self) -> u64 {
        self.attempt_limit
    }

    /// Position of a live outcome in the table; `None` for a zero-rate one.
    pub fn position(&self, handle: OutcomeHandle) -> Result<Option<usize>> {
        match self.handles.get(handle) {
            Some(Residence::Live(pos)) => Ok(Some(*pos)),
            Some(Residence::Dormant(_)) => Ok(None),
            None => Err(SamplerError::StaleHandle),
        }
    }

    pub fn table(&self) -> &RejectionTable<P, R> {
        &self.table
    }

    /// Recomputes the total rate from the table, discarding accumulated
    /// rounding.
    pub fn rebuild_total(&mut self) {
        let exact = self.table.rates().fold(R::zero(), |acc, r| acc + r);
        self.total.set(exact);
    }

    fn insert_live(&mut self, handle: OutcomeHandle, payload: P, rate: R) {
        let pos = self.table.push(handle, payload, rate);
        self.handles[handle] = Residence::Live(pos);
        self.total.add(rate);
    }

    fn remove_live(&mut self, pos: usize) -> P {
        let (removed, moved) = self.table.swap_remove(pos);
        if let Some(moved) = moved {
            self.handles[moved] = Residence::Live(pos);
        }
        if self.table.is_empty() {
            self.total.reset();
        } else {
            self.total.sub(removed.rate);
        }
        removed.payload
    }
}

impl<P, R: Real> Sampler<P, R> for RejectionSampler<P, R> {
    fn add(&mut self, payload: P, rate: R) -> Result<OutcomeHandle> {
        let rate = validate_capped(rate, self.max_rate)?;
        if rate > R::zero() {
            let handle = self.handles.insert(Residence::Live(usize::MAX));
            self.insert_live(handle, payload, rate);
            Ok(handle)
        } else {
            Ok(self.handles.insert(Residence::Dormant(payload)))
        }
    }

    fn update(&mut self, handle: OutcomeHandle, rate: R) -> Result<()> {
        let rate = validate_capped(rate, self.max_rate)?;
        let residence = self.handles.get(handle).ok_or(SamplerError::StaleHandle)?;
        match *residence {
            Residence::Live(pos) if rate > R::zero() => {
                let old = self.table.set_rate(pos, rate);
                self.total.sub(old);
                self.total.add(rate);
            }
            Residence::Live(pos) => {
                let payload = self.remove_live(pos);
                self.handles[handle] = Residence::Dormant(payload);
            }
            Residence::Dormant(_) if rate > R::zero() => {
                let Residence::Dormant(payload) =
                    std::mem::replace(&mut self.handles[handle], Residence::Live(usize::MAX))
                else {
                    unreachable!()
                };
                self.insert_live(handle, payload, rate);
            }
            Residence::Dormant(_) => {}
        }
        Ok(())
    }

    fn delete(&mut self, handle: OutcomeHandle) -> Result<P> {
        match self.handles.remove(handle) {
            Some(Residence::Live(pos)) => Ok(self.remove_live(pos)),
            Some(Residence::Dormant(payload)) => Ok(payload),
            None => Err(SamplerError::StaleHandle),
        }
    }

    fn extract_with_stats<G: RandomSource + ?Sized>(
        &self,
        rng: &mut G,
    ) -> Result<(Selected<'_, P>, ExtractStats)> {
        let (pos, attempts) = self
            .table
            .sample(rng, self.max_rate, self.attempt_limit, self.mode)?;
        let stats = ExtractStats {
            attempts,
            ..ExtractStats::default()
        };
        Ok(((self.table.handle(pos), self.table.payload(pos)), stats))
    }

    fn total_rate(&self) -> R {
        self.total.value()
    }

    fn len(&self) -> usize {
        self.table.len()
    }

    fn rate(&self, handle: OutcomeHandle) -> Result<R> {
        match self.handles.get(handle) {
            Some(Residence::Live(pos)) => Ok(self.table.rate(*pos)),
            Some(Residence::Dormant(_)) => Ok(R::zero()),
            None => Err(SamplerError::StaleHandle),
        }
    }

    fn payload(&self, handle: OutcomeHandle) -> Result<&P> {
        match self.handles.get(handle) {
            Some(Residence::Live(pos)) => Ok(self.table.payload(*pos)),
            Some(Residence::Dormant(payload)) => Ok(payload),
            None => Err(SamplerError::StaleHandle),
        }
    }

    fn check_invariants(&self) -> std::result::Result<(), InvariantViolation> {
        let mut exact = R::zero();
        for (pos, (handle, rate)) in self.table.iter().enumerate() {
            ensure_invariant!(
                rate > R::zero() && rate <= self.max_rate,
                "entry {pos} has rate {rate} outside (0, {}]",
                self.max_rate
            );
            ensure_invariant!(
                matches!(self.handles.get(handle), Some(Residence::Live(p)) if *p == pos),
                "entry {pos} is not the position of its handle"
            );
            exact = exact + rate;
        }
        let live = self
            .handles
            .values()
            .filter(|r| matches!(r, Residence::Live(_)))
            .count();
        ensure_invariant!(
            live == self.table.len(),
            "{live} live handles for {} entries",
            self.table.len()
        );
        ensure_invariant!(
            close(self.total.value(), exact, 1e-9),
            "total {} vs exact {exact}",
            self.total.value()
        );
        validate_rate(self.total.value()).map_err(|e| InvariantViolation(e.to_string()))?;
        Ok(())
    }
}
