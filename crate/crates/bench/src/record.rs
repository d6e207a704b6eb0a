use std::io::Write;

use dynsample::RateDistribution;

use crate::config::{BenchConfig, Method, OpKind};
use crate::runner::{predicted_attempts, RNG_NAME};

pub const HEADER: [&str; 14] = [
    "method",
    "dist",
    "n",
    "ratio",
    "c",
    "workload",
    "op_count",
    "mean_ns",
    "stddev_ns",
    "attempts_mean",
    "attempts_stddev",
    "predicted_attempts",
    "seed",
    "rng_name",
];

/// Columns that depend on wall-clock time.
pub const TIMING_COLUMNS: [&str; 2] = ["mean_ns", "stddev_ns"];

/// One CSV row. `None` is written as an empty field.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub dist: RateDistribution,
    pub n: usize,
    pub ratio: f64,
    /// Group constant; only set for composition-rejection.
    pub c: Option<f64>,
    pub workload: &'static str,
    pub op_count: u64,
    pub mean_ns: Option<f64>,
    pub stddev_ns: Option<f64>,
    pub attempts_mean: Option<f64>,
    pub attempts_stddev: Option<f64>,
    pub predicted_attempts: Option<f64>,
    pub seed: u64,
    pub rng_name: &'static str,
}

impl BenchRecord {
    /// Row carrying the configuration and prediction but no measurements.
    pub fn skeleton(cfg: &BenchConfig, op: OpKind) -> Self {
        Self {
            method: cfg.method,
            dist: cfg.dist,
            n: cfg.n,
            ratio: cfg.ratio,
            c: (cfg.method == Method::Cr).then_some(cfg.c),
            workload: op.name(),
            op_count: 0,
            mean_ns: None,
            stddev_ns: None,
            attempts_mean: None,
            attempts_stddev: None,
            predicted_attempts: predicted_attempts(cfg),
            seed: cfg.seed,
            rng_name: RNG_NAME,
        }
    }

    pub fn fields(&self) -> [String; 14] {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        [
            self.method.to_string(),
            self.dist.to_string(),
            self.n.to_string(),
            self.ratio.to_string(),
            opt(self.c),
            self.workload.to_string(),
            self.op_count.to_string(),
            opt(self.mean_ns),
            opt(self.stddev_ns),
            opt(self.attempts_mean),
            opt(self.attempts_stddev),
            opt(self.predicted_attempts),
            self.seed.to_string(),
            self.rng_name.to_string(),
        ]
    }
}

/// Streams records to CSV; the header is written on creation.
pub struct RecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(out: W) -> csv::Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, record: &BenchRecord) -> csv::Result<()> {
        self.inner.write_record(record.fields())?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> csv::Result<W> {
        self.inner.into_inner().map_err(|e| e.into_error().into())
    }
}

/// Writes the header and then every record.
pub fn write_csv<W: Write>(out: W, records: &[BenchRecord]) -> csv::Result<()> {
    let mut w = RecordWriter::new(out)?;
    for r in records {
        w.write(r)?;
    }
    Ok(())
}
