#![allow(dead_code)]

use dynsample::{RandomSource, Sampler};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson statistic of observed counts against expected probabilities.
/// Outcomes with zero probability must have zero counts.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&k, &p) in counts.iter().zip(probs) {
        if p == 0.0 {
            assert_eq!(k, 0, "zero-probability outcome was drawn");
            continue;
        }
        let e = p * n as f64;
        stat += (k as f64 - e).powi(2) / e;
        cells += 1;
    }
    (stat, cells.saturating_sub(1))
}

/// Critical value of chi-square with `df` degrees of freedom at level `alpha`.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}

pub fn assert_chi_square(counts: &[u64], probs: &[f64], alpha: f64) {
    let (stat, df) = chi_square(counts, probs);
    if df == 0 {
        return;
    }
    let crit = chi_square_critical(df, alpha);
    assert!(stat <= crit, "chi-square {stat:.2} > critical {crit:.2} (df {df})");
}

/// Extracts `draws` times and counts hits per payload index.
pub fn histogram<S, G>(sampler: &S, rng: &mut G, outcomes: usize, draws: usize) -> Vec<u64>
where
    S: Sampler<usize>,
    G: RandomSource,
{
    let mut counts = vec![0u64; outcomes];
    for _ in 0..draws {
        let (_, &p) = sampler.extract(rng).unwrap();
        counts[p] += 1;
    }
    counts
}

pub fn normalized(rates: &[f64]) -> Vec<f64> {
    let total: f64 = rates.iter().sum();
    rates.iter().map(|r| r / total).collect()
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Simpson rule on a logarithmic grid: ∫ f(x) dx = ∫ f(e^t) e^t dt.
pub fn simpson_log(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    simpson(|t| f(t.exp()) * t.exp(), a.ln(), b.ln(), n)
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
