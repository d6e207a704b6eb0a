#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson goodness-of-fit statistic and degrees of freedom. Cells with zero
/// probability must be empty.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> Result<(f64, usize), String> {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (i, (&k, &p)) in counts.iter().zip(probs).enumerate() {
        if p == 0.0 {
            if k != 0 {
                return Err(format!("outcome {i} has probability 0 but was drawn {k} times"));
            }
            continue;
        }
        let e = p * n as f64;
        stat += (k as f64 - e).powi(2) / e;
        cells += 1;
    }
    Ok((stat, cells.saturating_sub(1)))
}

pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}

/// Two-sample homogeneity statistic for samples of equal size.
pub fn homogeneity(a: &[u64], b: &[u64]) -> (f64, usize) {
    assert_eq!(a.iter().sum::<u64>(), b.iter().sum::<u64>());
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x + y > 0 {
            stat += (x as f64 - y as f64).powi(2) / (x + y) as f64;
            cells += 1;
        }
    }
    (stat, cells.saturating_sub(1))
}

/// Golden-section search for the minimum of a unimodal function on [a, b].
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    (a + b) / 2.0
}

pub fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
