//! Benchmark harness for the dynsample samplers: builds rate sets, times
//! extraction and update workloads, counts rejection attempts and writes
//! CSV rows.

pub mod config;
pub mod record;
pub mod runner;
pub mod sweep;
pub mod welford;

pub use config::{BenchConfig, ConfigError, Method, OpKind, Workload};
pub use record::{write_csv, BenchRecord, RecordWriter, HEADER, TIMING_COLUMNS};
pub use runner::{predicted_attempts, run_benchmark, run_op, BenchError, RNG_NAME};
pub use sweep::{run_sweep, Grid, SweepReport};
pub use welford::WelfordAccumulator;
