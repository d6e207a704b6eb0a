use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use dynsample::RateDistribution;
use dynsample_bench::{run_benchmark, run_sweep, write_csv, BenchConfig, Grid, Method, Workload};

/// Time extraction and update workloads on the dynsample samplers and
/// write the results as CSV.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// tree, rejection, cr or oracle
    #[arg(long, default_value = "tree")]
    method: Method,
    /// uniform or loguniform
    #[arg(long, default_value = "uniform")]
    dist: RateDistribution,
    /// Number of outcomes
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// min/max of the rate law, in (0, 1); max is 1
    #[arg(long, default_value_t = 1e-3)]
    ratio: f64,
    /// Group constant for cr; `e` is accepted
    #[arg(long, default_value = "2", value_parser = parse_c)]
    c: f64,
    /// Timed repetitions
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    /// Operations per timed repetition
    #[arg(long, default_value_t = 1000)]
    ops: usize,
    /// extract, update or mixed
    #[arg(long, default_value = "extract")]
    workload: Workload,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid such as `n=1e3,1e6;method=tree,cr;c=2,e`; other axes: dist, ratio, workload
    #[arg(long)]
    sweep: Option<String>,
}

fn parse_c(s: &str) -> Result<f64, String> {
    match s {
        "e" => Ok(std::f64::consts::E),
        _ => s.parse().map_err(|_| format!("{s:?} is not a number")),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let base = BenchConfig {
        method: cli.method,
        dist: cli.dist,
        n: cli.n,
        ratio: cli.ratio,
        c: cli.c,
        reps: cli.reps,
        ops_per_rep: cli.ops,
        seed: cli.seed,
        workload: cli.workload,
    };
    let out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    match &cli.sweep {
        Some(spec) => {
            let grid = Grid::parse(spec).context("parsing --sweep")?;
            let report = run_sweep(&grid, &base, out, |cfg, e| {
                eprintln!(
                    "warning: {} {} n={} ratio={} failed: {e}",
                    cfg.method, cfg.dist, cfg.n, cfg.ratio
                );
            })?;
            Ok(report.failures.is_empty())
        }
        None => {
            let records = run_benchmark(&base)?;
            write_csv(out, &records)?;
            Ok(true)
        }
    }
}
