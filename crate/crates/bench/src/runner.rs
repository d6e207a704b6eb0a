use std::hint::black_box;
use std::time::Instant;

use dynsample::analytics::{cr_cost, rejection_cost};
use dynsample::{
    CrSampler, CumulativeSampler, OutcomeHandle, RejectionSampler, Sampler, SamplerError,
    SamplerTree,
};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use thiserror::Error;

use crate::config::{BenchConfig, ConfigError, Method, OpKind};
use crate::record::BenchRecord;
use crate::welford::WelfordAccumulator;

pub const RNG_NAME: &str = "pcg64";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{method} {op}: {source}")]
    Sampler {
        method: Method,
        op: &'static str,
        source: SamplerError,
    },
}

#[derive(Debug, Default)]
struct Measured {
    time_ns: WelfordAccumulator,
    attempts: WelfordAccumulator,
}

/// Runs every operation kind of `cfg.workload`, one record each.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    cfg.validate()?;
    cfg.workload
        .ops()
        .iter()
        .map(|&op| run_op(cfg, op))
        .collect()
}

/// Runs one operation kind on a freshly populated sampler.
pub fn run_op(cfg: &BenchConfig, op: OpKind) -> Result<BenchRecord, BenchError> {
    cfg.validate()?;
    let spec = cfg.spec();
    let mut rng = Pcg64::seed_from_u64(cfg.seed);
    let rates: Vec<f64> = (0..cfg.n).map(|_| spec.sample(&mut rng)).collect();
    let wrap = |source| BenchError::Sampler {
        method: cfg.method,
        op: op.name(),
        source,
    };
    let measured = match cfg.method {
        Method::Tree => {
            let (mut s, hs) = SamplerTree::build(rates.into_iter().enumerate()).map_err(wrap)?;
            measure(&mut s, &hs, cfg, op, &mut rng)
        }
        Method::Oracle => {
            let (mut s, hs) =
                CumulativeSampler::build(rates.into_iter().enumerate()).map_err(wrap)?;
            measure(&mut s, &hs, cfg, op, &mut rng)
        }
        Method::Rejection => {
            let mut s = RejectionSampler::new(1.0).map_err(wrap)?;
            let hs = populate(&mut s, rates).map_err(wrap)?;
            measure(&mut s, &hs, cfg, op, &mut rng)
        }
        Method::Cr => {
            let mut s = CrSampler::new(1.0, cfg.c).map_err(wrap)?;
            let hs = populate(&mut s, rates).map_err(wrap)?;
            measure(&mut s, &hs, cfg, op, &mut rng)
        }
    }
    .map_err(wrap)?;

    let counted = cfg.method.counts_attempts() && op.extracts();
    Ok(BenchRecord {
        op_count: (cfg.reps * cfg.ops_per_rep) as u64,
        mean_ns: measured.time_ns.mean(),
        stddev_ns: measured.time_ns.std_dev(),
        attempts_mean: measured.attempts.mean().filter(|_| counted),
        attempts_stddev: measured.attempts.std_dev().filter(|_| counted),
        ..BenchRecord::skeleton(cfg, op)
    })
}

/// Predicted extraction cost in loop iterations; `None` for methods
/// without a rejection loop.
pub fn predicted_attempts(cfg: &BenchConfig) -> Option<f64> {
    cfg.validate().ok()?;
    let spec = cfg.spec();
    match cfg.method {
        Method::Rejection => Some(rejection_cost(&spec).expected_attempts),
        Method::Cr => cr_cost(&spec, cfg.c).ok().map(|p| p.cost.expected_total),
        Method::Tree | Method::Oracle => None,
    }
}

fn populate<S: Sampler<usize>>(s: &mut S, rates: Vec<f64>) -> Result<Vec<OutcomeHandle>, SamplerError> {
    rates
        .into_iter()
        .enumerate()
        .map(|(i, r)| s.add(i, r))
        .collect()
}

fn measure<S: Sampler<usize>>(
    s: &mut S,
    handles: &[OutcomeHandle],
    cfg: &BenchConfig,
    op: OpKind,
    rng: &mut Pcg64,
) -> Result<Measured, SamplerError> {
    let spec = cfg.spec();
    let ops = cfg.ops_per_rep;
    let mut out = Measured::default();
    let mut attempts = Vec::with_capacity(if op.extracts() { ops } else { 0 });
    let mut targets = Vec::with_capacity(ops);
    let mut new_rates = Vec::with_capacity(ops);
    for _ in 0..cfg.reps {
        attempts.clear();
        targets.clear();
        new_rates.clear();
        if op != OpKind::Extract {
            new_rates.extend((0..ops).map(|_| spec.sample(rng)));
        }
        match op {
            OpKind::UpdateExtracted => {
                for _ in 0..ops {
                    targets.push(s.extract(rng)?.0);
                }
            }
            OpKind::UpdateArbitrary => {
                targets.extend((0..ops).map(|_| handles[rng.random_range(0..handles.len())]));
            }
            OpKind::Extract | OpKind::Mixed => {}
        }

        let start = Instant::now();
        match op {
            OpKind::Extract => {
                for _ in 0..ops {
                    let ((h, _), st) = s.extract_with_stats(rng)?;
                    black_box(h);
                    attempts.push(st.attempts + st.scan_steps);
                }
            }
            OpKind::UpdateExtracted | OpKind::UpdateArbitrary => {
                for (&h, &r) in targets.iter().zip(&new_rates) {
                    s.update(h, r)?;
                }
            }
            OpKind::Mixed => {
                for &r in &new_rates {
                    let ((h, _), st) = s.extract_with_stats(rng)?;
                    s.update(h, r)?;
                    attempts.push(st.attempts + st.scan_steps);
                }
            }
        }
        let elapsed = start.elapsed();

        out.time_ns.push(elapsed.as_nanos() as f64 / ops as f64);
        out.attempts.extend(attempts.iter().map(|&a| a as f64));
    }
    black_box(s.total_rate());
    Ok(out)
}
