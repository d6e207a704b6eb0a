use crate::scalar::Real;

/// Running sum with Neumaier compensation.
///
/// Used for the incrementally maintained rate totals, which otherwise drift
/// after long runs of `+=` / `-=`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum<R> {
    sum: R,
    compensation: R,
}

impl<R: Real> CompensatedSum<R> {
    pub fn new() -> Self {
        Self {
            sum: R::zero(),
            compensation: R::zero(),
        }
    }

    pub fn add(&mut self, x: R) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn sub(&mut self, x: R) {
        self.add(-x);
    }

    pub fn value(&self) -> R {
        self.sum + self.compensation
    }

    pub fn reset(&mut self) {
        *self = Self::new();
    }

    /// Replaces the running state with an exact left-to-right sum.
    pub fn set(&mut self, value: R) {
        self.sum = value;
        self.compensation = R::zero();
    }
}

impl<R: Real> FromIterator<R> for CompensatedSum<R> {
    fn from_iter<I: IntoIterator<Item = R>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
