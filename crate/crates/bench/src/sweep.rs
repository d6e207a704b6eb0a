//! Grid sweeps over benchmark parameters.
//!
//! A grid is written as `axis=v1,v2;axis=v3`, for example
//! `n=1e3,1e6;ratio=0.001;method=tree,cr;c=2,e`. Axes left out keep the
//! base configuration's value. An empty grid string, or an axis with no
//! values, selects no cells.

use std::f64::consts::E;
use std::io::Write;

use crate::config::{BenchConfig, ConfigError, Method, Workload};
use crate::record::{BenchRecord, RecordWriter};
use crate::runner::{run_op, BenchError};
use dynsample::RateDistribution;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grid {
    pub method: Option<Vec<Method>>,
    pub dist: Option<Vec<RateDistribution>>,
    pub n: Option<Vec<usize>>,
    pub ratio: Option<Vec<f64>>,
    pub c: Option<Vec<f64>>,
    pub workload: Option<Vec<Workload>>,
    empty: bool,
}

fn bad(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

fn parse_f64(s: &str) -> Result<f64, ConfigError> {
    match s {
        "e" => Ok(E),
        _ => s.parse().map_err(|_| bad("sweep", format!("{s:?} is not a number"))),
    }
}

fn parse_count(s: &str) -> Result<usize, ConfigError> {
    let x = parse_f64(s)?;
    if x >= 0.0 && x.fract() == 0.0 && x <= usize::MAX as f64 {
        Ok(x as usize)
    } else {
        Err(bad("sweep", format!("{s:?} is not a count")))
    }
}

fn axis<T: Clone>(values: &Option<Vec<T>>, default: T) -> Vec<T> {
    values.clone().unwrap_or_else(|| vec![default])
}

fn values<T>(
    raw: &str,
    parse: impl Fn(&str) -> Result<T, ConfigError>,
) -> Result<Vec<T>, ConfigError> {
    raw.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(parse)
        .collect()
}

impl Grid {
    pub fn parse(spec: &str) -> Result<Self, ConfigError> {
        let mut grid = Grid::default();
        if spec.trim().is_empty() {
            grid.empty = true;
            return Ok(grid);
        }
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, raw) = part
                .split_once('=')
                .ok_or_else(|| bad("sweep", format!("{part:?} is not axis=values")))?;
            match key.trim() {
                "method" => grid.method = Some(values(raw, |v| v.parse())?),
                "dist" => {
                    grid.dist = Some(values(raw, |v| {
                        v.parse().map_err(|_| ConfigError::Unknown {
                            what: "distribution",
                            value: v.to_string(),
                        })
                    })?)
                }
                "n" => grid.n = Some(values(raw, parse_count)?),
                "ratio" => grid.ratio = Some(values(raw, parse_f64)?),
                "c" => grid.c = Some(values(raw, parse_f64)?),
                "workload" => grid.workload = Some(values(raw, |v| v.parse())?),
                other => return Err(bad("sweep", format!("unknown axis {other:?}"))),
            }
        }
        Ok(grid)
    }

    /// Cross product in a fixed order: method, dist, n, ratio, c, workload.
    /// The `c` axis only multiplies composition-rejection cells.
    pub fn cells(&self, base: &BenchConfig) -> Vec<BenchConfig> {
        if self.empty {
            return Vec::new();
        }
        let methods = axis(&self.method, base.method);
        let dists = axis(&self.dist, base.dist);
        let ns = axis(&self.n, base.n);
        let ratios = axis(&self.ratio, base.ratio);
        let cs = axis(&self.c, base.c);
        let workloads = axis(&self.workload, base.workload);
        let mut out = Vec::new();
        for &method in &methods {
            let cs: &[f64] = if method == Method::Cr { &cs } else { &cs[..cs.len().min(1)] };
            for &dist in &dists {
                for &n in &ns {
                    for &ratio in &ratios {
                        for &c in cs {
                            for &workload in &workloads {
                                out.push(BenchConfig {
                                    method,
                                    dist,
                                    n,
                                    ratio,
                                    c,
                                    workload,
                                    ..base.clone()
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Outcome of a sweep: rows written and the cells that failed.
#[derive(Debug, Default)]
pub struct SweepReport {
    pub rows: usize,
    pub failures: Vec<(BenchConfig, BenchError)>,
}

/// Runs every cell and streams rows to `out`. A failing cell still gets a
/// row, with empty measurement columns, and the sweep continues.
pub fn run_sweep<W: Write>(
    grid: &Grid,
    base: &BenchConfig,
    out: W,
    mut on_failure: impl FnMut(&BenchConfig, &BenchError),
) -> csv::Result<SweepReport> {
    let mut writer = RecordWriter::new(out)?;
    let mut report = SweepReport::default();
    for cfg in grid.cells(base) {
        for &op in cfg.workload.ops() {
            let record = match run_op(&cfg, op) {
                Ok(r) => r,
                Err(e) => {
                    on_failure(&cfg, &e);
                    let row = BenchRecord::skeleton(&cfg, op);
                    report.failures.push((cfg.clone(), e));
                    row
                }
            };
            writer.write(&record)?;
            report.rows += 1;
        }
    }
    writer.into_inner()?;
    Ok(report)
}
