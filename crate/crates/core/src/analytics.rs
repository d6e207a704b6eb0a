//! Expected extraction cost of the rejection and composition-rejection
//! samplers, in units of loop iterations.
//!
//! Costs are evaluated in exact finite form for a given rate law. For
//! composition-rejection, band `i` covers (max/c^(i+1), max/c^i] and the
//! last band `d = floor(log_c(max/min))` is cut off at `min`. A band is
//! selected with probability equal to its share of the total rate, and the
//! in-band acceptance probability is the band's conditional mean rate
//! divided by its ceiling:
//!
//! ```text
//! mass_i  = ∫_band f(x) dx
//! rho_i   = ∫_band x f(x) dx / ∫ x f(x) dx
//! p_i     = (c^i / max) ∫_band x f(x) dx / mass_i
//! E[cost] = Σ_i rho_i (i + 1 / p_i)
//! ```
//!
//! where `i` counts the groups skipped by the linear scan.

use crate::bands::GeometricBands;
use crate::distributions::{DistributionSpec, RateDistribution};
use crate::error::Result;
use crate::scalar::Real;

/// Predicted cost of one extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostPrediction<R> {
    /// Per-attempt acceptance probability (rate-weighted harmonic mean over
    /// bands for composition-rejection).
    pub p_accept: R,
    /// Expected rejection-loop iterations, `1 / p_accept`.
    pub expected_attempts: R,
    /// Expected groups skipped by the scan; zero for plain rejection.
    pub expected_select: R,
    /// `expected_select + expected_attempts`.
    pub expected_total: R,
    /// Index of the last band, `floor(log_c(max/min))`; zero for plain rejection.
    pub depth_d: usize,
}

/// Per-band terms of the composition-rejection cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCost<R> {
    pub index: usize,
    /// Probability mass of the band: the fraction of outcomes in it.
    pub mass: R,
    /// Share of the total rate held by the band, `rho_i`: the probability
    /// that the scan stops at it.
    pub share: R,
    /// In-band acceptance probability, `p_i`; zero for an empty band.
    pub p_accept: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrCostPrediction<R> {
    /// Finite-sum evaluation over the bands.
    pub cost: CostPrediction<R>,
    pub bands: Vec<BandCost<R>>,
    /// The same expectation summed in closed form.
    pub closed_form: R,
    /// Leading-order growth of the cost, useful for comparing `c` values:
    /// `(c / ln c) ln(max/min) (max/min)` for uniform rates and
    /// `c/(c-1) L + L/(2 ln c) + L²/(2 ln² c)` with `L = ln(max/min)` for
    /// log-uniform rates.
    pub leading_order: R,
}

/// Acceptance probability and expected attempts of plain rejection with the
/// ceiling at `spec.max()`.
///
/// Uniform: `p = (max² - min²) / (2 (max² - max·min)) = (max + min) / (2 max)`.
/// Log-uniform: `p = (1 - min/max) / ln(max/min)`.
pub fn rejection_cost<R: Real>(spec: &DistributionSpec<R>) -> CostPrediction<R> {
    let ratio = spec.ratio();
    let p = match spec.kind() {
        RateDistribution::Uniform => (spec.max() + spec.min()) / (R::lit(2.0) * spec.max()),
        RateDistribution::LogUniform if ratio >= R::one() => R::one(),
        RateDistribution::LogUniform => (R::one() - ratio) / (-ratio.ln()),
    };
    let attempts = p.recip();
    CostPrediction {
        p_accept: p,
        expected_attempts: attempts,
        expected_select: R::zero(),
        expected_total: attempts,
        depth_d: 0,
    }
}

/// Number of the last band, `floor(log_c(max/min))`, evaluated with the same
/// band predicate the sampler uses.
pub fn depth<R: Real>(spec: &DistributionSpec<R>, c: R) -> Result<usize> {
    GeometricBands::new(spec.max(), c)?.index_of(spec.min())
}

/// Expected composition-rejection cost with group constant `c` and ceiling
/// `spec.max()`.
pub fn cr_cost<R: Real>(spec: &DistributionSpec<R>, c: R) -> Result<CrCostPrediction<R>> {
    let bands = GeometricBands::new(spec.max(), c)?;
    let d = bands.index_of(spec.min())?;
    let mean = spec.mean();
    let mut select = R::zero();
    let mut attempts = R::zero();
    let mut terms = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let (lo, hi) = (bands.lower(i), bands.upper(i));
        let mass = spec.mass(lo, hi);
        let moment = spec.moment(lo, hi);
        let (share, p) = if mass > R::zero() {
            (moment / mean, moment / (mass * hi))
        } else {
            (R::zero(), R::zero())
        };
        if share > R::zero() {
            select = select + share * R::from_count(i);
            attempts = attempts + share / p;
        }
        terms.push(BandCost {
            index: i,
            mass,
            share,
            p_accept: p,
        });
    }
    Ok(CrCostPrediction {
        cost: CostPrediction {
            p_accept: attempts.recip(),
            expected_attempts: attempts,
            expected_select: select,
            expected_total: select + attempts,
            depth_d: d,
        },
        bands: terms,
        closed_form: closed_form(spec, c, d, &bands),
        leading_order: leading_order(spec, c),
    })
}

/// `(1 - y) Σ_{i<d} i y^i`.
fn index_weight<R: Real>(y: R, d: usize) -> R {
    let one = R::one();
    let df = R::from_count(d);
    let y_d = y.powi(d as i32);
    let y_dm1 = if d == 0 { R::zero() } else { y.powi(d as i32 - 1) };
    y * (one - df * y_dm1 + (df - one) * y_d) / (one - y)
}

fn closed_form<R: Real>(spec: &DistributionSpec<R>, c: R, d: usize, bands: &GeometricBands<R>) -> R {
    let (min, max) = (spec.min(), spec.max());
    if min == max {
        return R::one();
    }
    let one = R::one();
    let two = R::lit(2.0);
    let df = R::from_count(d);
    let m = min / max;
    let x = c.recip();
    let x_d = bands.upper(d) / max;
    match spec.kind() {
        RateDistribution::LogUniform => {
            // Full band i holds rate share (1 - x) x^i / (1 - m) and accepts
            // with probability (1 - x) / ln c; the last band has log-width phi.
            let lc = c.ln();
            let phi = ((x_d / m).ln()).max(R::zero());
            let select = index_weight(x, d) + df * (x_d - m);
            let accept = lc * (one - x_d) / (one - x) + phi * x_d;
            (select + accept) / (one - m)
        }
        RateDistribution::Uniform => {
            // Full band i holds rate share (1 - x²) x^(2i) / (1 - m²) and
            // accepts with probability (1 + x) / 2.
            let y = x * x;
            let y_d = x_d * x_d;
            let full = index_weight(y, d) + two * (one - y_d) / (one + x);
            let last = (y_d - m * m) * (df + two * x_d / (x_d + m));
            (full + last) / (one - m * m)
        }
    }
}

/// Leading-order composition-rejection cost; see
/// [`CrCostPrediction::leading_order`].
pub fn leading_order<R: Real>(spec: &DistributionSpec<R>, c: R) -> R {
    let spread = spec.max() / spec.min();
    let l = spread.ln();
    let lc = c.ln();
    match spec.kind() {
        RateDistribution::Uniform => c / lc * l * spread,
        RateDistribution::LogUniform => {
            let two = R::lit(2.0);
            c / (c - R::one()) * l + l / (two * lc) + (l * l) / (two * lc * lc)
        }
    }
}

/// Group constant minimizing the leading-order cost: `e` for uniform rates.
/// For log-uniform rates the dominant `ln²(max/min)` term does not depend on
/// `c`, so there is no single optimum and `None` is returned.
pub fn optimal_c<R: Real>(spec: &DistributionSpec<R>) -> Option<R> {
    match spec.kind() {
        RateDistribution::Uniform => Some(R::E()),
        RateDistribution::LogUniform => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn rejection_uniform_tends_to_two() {
        let spec = DistributionSpec::<f64>::uniform(1e-9, 1.0).unwrap();
        assert!(rel(rejection_cost(&spec).expected_attempts, 2.0) < 1e-8);
        let spec = DistributionSpec::<f64>::uniform(1e-3, 1.0).unwrap();
        let p = (1.0 - 1e-6) / (2.0 * (1.0 - 1e-3));
        assert!(rel(rejection_cost(&spec).p_accept, p) < 1e-15);
    }

    #[test]
    fn rejection_log_uniform() {
        let spec = DistributionSpec::<f64>::log_uniform(1e-3, 1.0).unwrap();
        let cost = rejection_cost(&spec);
        assert!(rel(cost.expected_attempts, 1000f64.ln() / 0.999) < 1e-14);
        assert!((cost.expected_attempts - 6.9147).abs() < 1e-4);
        assert_eq!(cost.expected_attempts, cost.p_accept.recip());
    }

    #[test]
    fn degenerate_spec_costs_one_attempt() {
        for kind in [RateDistribution::Uniform, RateDistribution::LogUniform] {
            let spec = DistributionSpec::<f64>::new(kind, 0.5, 0.5).unwrap();
            assert_eq!(rejection_cost(&spec).expected_attempts, 1.0);
            let cr = cr_cost(&spec, 2.0).unwrap();
            assert_eq!(cr.cost.expected_total, 1.0);
            assert_eq!(cr.closed_form, 1.0);
        }
    }

    #[test]
    fn depth_examples() {
        let spec = DistributionSpec::<f64>::log_uniform(1.0, 1000.0).unwrap();
        assert_eq!(depth(&spec, 10.0).unwrap(), 3);
        let spec = DistributionSpec::<f64>::log_uniform(1e-3, 1.0).unwrap();
        assert_eq!(depth(&spec, 2.0).unwrap(), 9);
    }

    #[test]
    fn log_uniform_bands_have_equal_mass() {
        // max/min = 10^3 with c = 10 gives exactly three full bands; the
        // fourth is the point {min} with no mass.
        let spec = DistributionSpec::<f64>::log_uniform(1e-3, 1.0).unwrap();
        let cr = cr_cost(&spec, 10.0).unwrap();
        assert_eq!(cr.cost.depth_d, 3);
        for band in &cr.bands[..3] {
            assert!((band.mass - 1.0 / 3.0).abs() < 1e-12, "{band:?}");
        }
        assert!(cr.bands[3].mass.abs() < 1e-12);
    }

    #[test]
    fn band_masses_sum_to_one() {
        for kind in [RateDistribution::Uniform, RateDistribution::LogUniform] {
            for ratio in [0.5, 1e-1, 1e-3, 1e-6] {
                for c in [1.5, 2.0, std::f64::consts::E, 4.0, 10.0] {
                    let spec = DistributionSpec::<f64>::from_ratio(kind, ratio, 1.0).unwrap();
                    let total: f64 = cr_cost(&spec, c).unwrap().bands.iter().map(|b| b.mass).sum();
                    assert!((total - 1.0).abs() < 1e-9, "{kind} {ratio} {c}: {total}");
                }
            }
        }
    }

    #[test]
    fn in_band_acceptance_exceeds_one_over_c() {
        for kind in [RateDistribution::Uniform, RateDistribution::LogUniform] {
            let spec = DistributionSpec::<f64>::from_ratio(kind, 1e-4, 1.0).unwrap();
            for c in [1.5, 2.0, 4.0] {
                for band in cr_cost(&spec, c).unwrap().bands {
                    if band.mass > 0.0 {
                        assert!(band.p_accept > 1.0 / c && band.p_accept <= 1.0, "{band:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn optimal_c_values() {
        let u = DistributionSpec::<f64>::uniform(1e-3, 1.0).unwrap();
        assert_eq!(optimal_c(&u), Some(std::f64::consts::E));
        let l = DistributionSpec::<f64>::log_uniform(1e-3, 1.0).unwrap();
        assert_eq!(optimal_c(&l), None);
    }

    #[test]
    fn f32_costs() {
        let spec = DistributionSpec::<f32>::log_uniform(1e-3, 1.0).unwrap();
        let cr = cr_cost(&spec, 2.0f32).unwrap();
        assert!((cr.cost.expected_total - cr.closed_form).abs() < 1e-4);
    }
}
