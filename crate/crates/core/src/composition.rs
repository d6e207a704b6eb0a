//! Composition-rejection sampler.
//!
//! Outcomes are bucketed into geometric rate bands (max/c^(i+1), max/c^i].
//! Extraction first picks a band by a linear scan over the band sums, then
//! runs rejection inside the band against its own ceiling `max / c^i`, so the
//! in-band acceptance probability is always above `1 / c`.

use slotmap::SlotMap;

use crate::bands::GeometricBands;
use crate::error::{ensure_invariant, InvariantViolation, Result, SamplerError};
use crate::rejection::{DrawMode, RejectionTable, Residence, DEFAULT_ATTEMPT_LIMIT};
use crate::sampler::{
    close, validate_capped, ExtractStats, OutcomeHandle, RandomSource, Sampler, Selected,
};
use crate::scalar::Real;
use crate::summation::CompensatedSum;

/// One band: a rejection table whose ceiling is `max / c^i`.
#[derive(Debug, Clone)]
pub struct RateGroup<P, R> {
    table: RejectionTable<P, R>,
    ceiling: R,
    sum: CompensatedSum<R>,
}

impl<P, R: Real> RateGroup<P, R> {
    fn new(ceiling: R) -> Self {
        Self {
            table: RejectionTable::default(),
            ceiling,
            sum: CompensatedSum::new(),
        }
    }

    pub fn ceiling(&self) -> R {
        self.ceiling
    }

    pub fn sum_rate(&self) -> R {
        self.sum.value()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn rates(&self) -> impl Iterator<Item = R> + '_ {
        self.table.rates()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Location {
    group: usize,
    pos: usize,
}

/// Composition-rejection sampler over geometric rate bands.
#[derive(Debug, Clone)]
pub struct CrSampler<P, R = f64> {
    bands: GeometricBands<R>,
    groups: Vec<RateGroup<P, R>>,
    handles: SlotMap<OutcomeHandle, Residence<Location, P>>,
    total: CompensatedSum<R>,
    live: usize,
    attempt_limit: u64,
}

impl<P, R: Real> CrSampler<P, R> {
    /// Creates an empty sampler for rates in (0, `max`] with group constant `c`.
    pub fn new(max: R, c: R) -> Result<Self> {
        Ok(Self {
            bands: GeometricBands::new(max, c)?,
            groups: Vec::new(),
            handles: SlotMap::with_key(),
            total: CompensatedSum::new(),
            live: 0,
            attempt_limit: DEFAULT_ATTEMPT_LIMIT,
        })
    }

    /// Uses `c = e`, the group constant suited to uniformly spread rates.
    pub fn with_default_c(max: R) -> Result<Self> {
        Self::new(max, R::E())
    }

    pub fn with_attempt_limit(mut self, limit: u64) -> Self {
        self.attempt_limit = limit.max(1);
        self
    }

    pub fn max_rate(&self) -> R {
        self.bands.max()
    }

    pub fn c(&self) -> R {
        self.bands.c()
    }

    pub fn bands(&self) -> &GeometricBands<R> {
        &self.bands
    }

    /// Group a positive rate belongs to.
    pub fn group_index(&self, rate: R) -> Result<usize> {
        self.bands.index_of(rate)
    }

    /// Dense group sequence, index = band number. Empty groups have sum zero.
    pub fn groups(&self) -> &[RateGroup<P, R>] {
        &self.groups
    }

    pub fn nonempty_groups(&self) -> usize {
        self.groups.iter().filter(|g| !g.is_empty()).count()
    }

    /// Band currently holding the outcome; `None` for a zero-rate one.
    pub fn group_of(&self, handle: OutcomeHandle) -> Result<Option<usize>> {
        match self.handles.get(handle) {
            Some(Residence::Live(loc)) => Ok(Some(loc.group)),
            Some(Residence::Dormant(_)) => Ok(None),
            None => Err(SamplerError::StaleHandle),
        }
    }

    /// Recomputes every group sum and the total exactly from the members.
    pub fn rebuild_sums(&mut self) {
        let mut total = R::zero();
        for group in &mut self.groups {
            let exact = group.table.rates().fold(R::zero(), |acc, r| acc + r);
            group.sum.set(exact);
            total = total + exact;
        }
        self.total.set(total);
    }

    fn group_mut(&mut self, i: usize) -> &mut RateGroup<P, R> {
        while self.groups.len() <= i {
            let ceiling = self.bands.upper(self.groups.len());
            self.groups.push(RateGroup::new(ceiling));
        }
        &mut self.groups[i]
    }

    fn insert_live(&mut self, handle: OutcomeHandle, payload: P, rate: R, group: usize) {
        let g = self.group_mut(group);
        let pos = g.table.push(handle, payload, rate);
        g.sum.add(rate);
        self.handles[handle] = Residence::Live(Location { group, pos });
        self.total.add(rate);
        self.live += 1;
    }

    fn remove_live(&mut self, loc: Location) -> P {
        let g = &mut self.groups[loc.group];
        let (removed, moved) = g.table.swap_remove(loc.pos);
        if g.table.is_empty() {
            g.sum.reset();
        } else {
            g.sum.sub(removed.rate);
        }
        if let Some(moved) = moved {
            self.handles[moved] = Residence::Live(loc);
        }
        self.live -= 1;
        if self.live == 0 {
            self.total.reset();
        } else {
            self.total.sub(removed.rate);
        }
        removed.payload
    }
}

impl<P, R: Real> Sampler<P, R> for CrSampler<P, R> {
    fn add(&mut self, payload: P, rate: R) -> Result<OutcomeHandle> {
        let rate = validate_capped(rate, self.bands.max())?;
        if rate > R::zero() {
            let group = self.group_index(rate)?;
            let handle = self.handles.insert(Residence::Live(Location { group, pos: 0 }));
            self.insert_live(handle, payload, rate, group);
            Ok(handle)
        } else {
            Ok(self.handles.insert(Residence::Dormant(payload)))
        }
    }

    fn update(&mut self, handle: OutcomeHandle, rate: R) -> Result<()> {
        let rate = validate_capped(rate, self.bands.max())?;
        let residence = self.handles.get(handle).ok_or(SamplerError::StaleHandle)?;
        match *residence {
            Residence::Live(loc) if rate > R::zero() => {
                let target = self.group_index(rate)?;
                if target == loc.group {
                    let g = &mut self.groups[loc.group];
                    let old = g.table.set_rate(loc.pos, rate);
                    g.sum.sub(old);
                    g.sum.add(rate);
                    self.total.sub(old);
                    self.total.add(rate);
                } else {
                    let payload = self.remove_live(loc);
                    self.insert_live(handle, payload, rate, target);
                }
            }
            Residence::Live(loc) => {
                let payload = self.remove_live(loc);
                self.handles[handle] = Residence::Dormant(payload);
            }
            Residence::Dormant(_) if rate > R::zero() => {
                let group = self.group_index(rate)?;
                let Residence::Dormant(payload) = std::mem::replace(
                    &mut self.handles[handle],
                    Residence::Live(Location { group, pos: 0 }),
                ) else {
                    unreachable!()
                };
                self.insert_live(handle, payload, rate, group);
            }
            Residence::Dormant(_) => {}
        }
        Ok(())
    }

    fn delete(&mut self, handle: OutcomeHandle) -> Result<P> {
        match self.handles.remove(handle) {
            Some(Residence::Live(loc)) => Ok(self.remove_live(loc)),
            Some(Residence::Dormant(payload)) => Ok(payload),
            None => Err(SamplerError::StaleHandle),
        }
    }

    fn extract_with_stats<G: RandomSource + ?Sized>(
        &self,
        rng: &mut G,
    ) -> Result<(Selected<'_, P>, ExtractStats)> {
        let total = self.total.value();
        if self.live == 0 || total.is_nan() || total <= R::zero() {
            return Err(SamplerError::EmptyStructure);
        }
        let mut draw = rng.next_below(total);
        // Rounding drift can push the draw past the final sum; fall back to
        // the last non-empty group.
        let mut chosen = None;
        for (i, group) in self.groups.iter().enumerate() {
            let sum = group.sum.value();
            if sum > draw {
                chosen = Some(i);
                break;
            }
            draw = draw - sum;
        }
        let group_ix = match chosen {
            Some(i) => i,
            None => self
                .groups
                .iter()
                .rposition(|g| !g.is_empty())
                .ok_or(SamplerError::EmptyStructure)?,
        };
        let group = &self.groups[group_ix];
        let (pos, attempts) =
            group
                .table
                .sample(rng, group.ceiling, self.attempt_limit, DrawMode::Independent)?;
        let stats = ExtractStats {
            attempts,
            scan_steps: group_ix as u64,
            node_visits: 0,
            group: Some(group_ix),
        };
        Ok(((group.table.handle(pos), group.table.payload(pos)), stats))
    }

    fn total_rate(&self) -> R {
        self.total.value()
    }

    fn len(&self) -> usize {
        self.live
    }

    fn rate(&self, handle: OutcomeHandle) -> Result<R> {
        match self.handles.get(handle) {
            Some(Residence::Live(loc)) => Ok(self.groups[loc.group].table.rate(loc.pos)),
            Some(Residence::Dormant(_)) => Ok(R::zero()),
            None => Err(SamplerError::StaleHandle),
        }
    }

    fn payload(&self, handle: OutcomeHandle) -> Result<&P> {
        match self.handles.get(handle) {
            Some(Residence::Live(loc)) => Ok(self.groups[loc.group].table.payload(loc.pos)),
            Some(Residence::Dormant(payload)) => Ok(payload),
            None => Err(SamplerError::StaleHandle),
        }
    }

    fn check_invariants(&self) -> std::result::Result<(), InvariantViolation> {
        let mut members = 0;
        let mut group_total = R::zero();
        for (i, group) in self.groups.iter().enumerate() {
            ensure_invariant!(
                group.ceiling == self.bands.upper(i),
                "group {i} ceiling {} is not max/c^{i}",
                group.ceiling
            );
            let mut exact = R::zero();
            for (pos, (handle, rate)) in group.table.iter().enumerate() {
                ensure_invariant!(
                    self.bands.contains(i, rate),
                    "rate {rate} outside band {i} ({}, {}]",
                    self.bands.lower(i),
                    self.bands.upper(i)
                );
                ensure_invariant!(
                    matches!(
                        self.handles.get(handle),
                        Some(Residence::Live(loc)) if *loc == Location { group: i, pos }
                    ),
                    "entry {pos} of group {i} is not where its handle points"
                );
                exact = exact + rate;
            }
            ensure_invariant!(
                close(group.sum.value(), exact, 1e-9),
                "group {i} sum {} vs exact {exact}",
                group.sum.value()
            );
            if group.is_empty() {
                ensure_invariant!(group.sum.value() == R::zero(), "empty group {i} has nonzero sum");
            }
            members += group.len();
            group_total = group_total + group.sum.value();
        }
        ensure_invariant!(members == self.live, "{members} members vs live count {}", self.live);
        let live_handles = self
            .handles
            .values()
            .filter(|r| matches!(r, Residence::Live(_)))
            .count();
        ensure_invariant!(live_handles == self.live, "{live_handles} live handles vs {}", self.live);
        ensure_invariant!(
            close(self.total.value(), group_total, 1e-9),
            "total {} vs group sums {group_total}",
            self.total.value()
        );
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_pcg::Pcg64;

    #[test]
    fn first_add_at_max_creates_group_zero() {
        let mut s = CrSampler::<_, f64>::new(1.0, 2.0).unwrap();
        let h = s.add("a", 1.0).unwrap();
        assert_eq!(s.group_of(h).unwrap(), Some(0));
        assert_eq!(s.groups().len(), 1);
        assert_eq!(s.groups()[0].len(), 1);
    }

    #[test]
    fn two_bands() {
        let c = 3.0;
        let mut s = CrSampler::<_, f64>::new(1.0, c).unwrap();
        let a = s.add(0, 1.0).unwrap();
        let b = s.add(1, 1.0 / (2.0 * c)).unwrap();
        assert_eq!(s.group_of(a).unwrap(), Some(0));
        assert_eq!(s.group_of(b).unwrap(), Some(1));
        assert_eq!(s.nonempty_groups(), 2);
        s.check_invariants().unwrap();
    }

    #[test]
    fn boundary_rate_belongs_to_band_it_tops() {
        // With c = 2, max/(2c) = max/c^2 is the inclusive top of band 2.
        let mut s = CrSampler::<_, f64>::new(1.0, 2.0).unwrap();
        let h = s.add(0, 0.25).unwrap();
        assert_eq!(s.group_of(h).unwrap(), Some(2));
        assert_eq!(s.groups()[2].ceiling(), 0.25);
    }

    #[test]
    fn within_and_cross_band_updates() {
        let mut s = CrSampler::<_, f64>::new(1.0, 2.0).unwrap();
        let h = s.add(0, 0.8).unwrap();
        let other = s.add(1, 0.9).unwrap();
        s.update(h, 0.6).unwrap();
        assert_eq!(s.group_of(h).unwrap(), Some(0));
        assert!((s.groups()[0].sum_rate() - 1.5).abs() < 1e-15);
        s.update(h, 0.3).unwrap();
        assert_eq!(s.group_of(h).unwrap(), Some(1));
        assert!((s.groups()[0].sum_rate() - 0.9).abs() < 1e-15);
        assert!((s.groups()[1].sum_rate() - 0.3).abs() < 1e-15);
        assert_eq!(s.rate(other).unwrap(), 0.9);
        s.check_invariants().unwrap();
    }

    #[test]
    fn zero_update_removes() {
        let mut s = CrSampler::<_, f64>::new(1.0, 2.0).unwrap();
        let h = s.add(0, 0.8).unwrap();
        s.add(1, 0.4).unwrap();
        s.update(h, 0.0).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.total_rate() - 0.4).abs() < 1e-15);
        assert_eq!(s.group_of(h).unwrap(), None);
        s.update(h, 0.1).unwrap();
        assert_eq!(s.group_of(h).unwrap(), Some(3));
        s.check_invariants().unwrap();
    }

    #[test]
    fn single_group_scan_cost_is_zero() {
        let mut s = CrSampler::<_, f64>::new(1.0, 2.0).unwrap();
        for i in 0..10 {
            s.add(i, 0.75).unwrap();
        }
        let mut rng = Pcg64::seed_from_u64(9);
        for _ in 0..100 {
            let (_, stats) = s.extract_with_stats(&mut rng).unwrap();
            assert_eq!(stats.scan_steps, 0);
            assert_eq!(stats.group, Some(0));
        }
    }

    #[test]
    fn rebuild_sums_on_empty_and_single() {
        let mut s = CrSampler::<u8>::new(1.0, 2.0).unwrap();
        s.rebuild_sums();
        assert_eq!(s.total_rate(), 0.0);
        s.add(0, 0.3).unwrap();
        s.rebuild_sums();
        assert_eq!(s.total_rate(), 0.3);
        assert_eq!(s.groups()[1].sum_rate(), 0.3);
    }

    #[test]
    fn rate_ceiling_and_validation() {
        let mut s = CrSampler::<_, f64>::new(1.0, 2.0).unwrap();
        assert!(matches!(s.add(0, 1.5), Err(SamplerError::RateExceedsMax { .. })));
        assert!(matches!(s.add(0, f64::NAN), Err(SamplerError::InvalidRate(_))));
        assert!(CrSampler::<u8>::new(1.0, 0.5).is_err());
        assert_eq!(CrSampler::<u8>::with_default_c(1.0).unwrap().c(), std::f64::consts::E);
    }

    #[test]
    fn delete_relocates_within_group() {
        let mut s = CrSampler::<_, f64>::new(1.0, 2.0).unwrap();
        let hs: Vec<_> = (0..5).map(|i| s.add(i, 0.6 + 0.05 * i as f64).unwrap()).collect();
        assert_eq!(s.delete(hs[1]).unwrap(), 1);
        assert_eq!(s.delete(hs[1]), Err(SamplerError::StaleHandle));
        for (i, &h) in hs.iter().enumerate().filter(|(i, _)| *i != 1) {
            assert_eq!(*s.payload(h).unwrap(), i);
        }
        s.check_invariants().unwrap();
    }
}
