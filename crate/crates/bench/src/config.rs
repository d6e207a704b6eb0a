use std::fmt;
use std::str::FromStr;

use dynsample::{DistributionSpec, RateDistribution};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown {what} {value:?}")]
    Unknown { what: &'static str, value: String },
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Tree,
    Rejection,
    Cr,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Tree, Method::Rejection, Method::Cr, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Tree => "tree",
            Method::Rejection => "rejection",
            Method::Cr => "cr",
            Method::Oracle => "oracle",
        }
    }

    /// Whether extraction runs a rejection loop whose attempts are counted.
    pub fn counts_attempts(self) -> bool {
        matches!(self, Method::Rejection | Method::Cr)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ConfigError::Unknown {
                what: "method",
                value: s.to_string(),
            })
    }
}

/// Workload requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Workload {
    Extract,
    /// Runs both update variants, one row each.
    Update,
    Mixed,
}

impl Workload {
    pub fn name(self) -> &'static str {
        match self {
            Workload::Extract => "extract",
            Workload::Update => "update",
            Workload::Mixed => "mixed",
        }
    }

    pub fn ops(self) -> &'static [OpKind] {
        match self {
            Workload::Extract => &[OpKind::Extract],
            Workload::Update => &[OpKind::UpdateExtracted, OpKind::UpdateArbitrary],
            Workload::Mixed => &[OpKind::Mixed],
        }
    }
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Workload {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "extract" => Ok(Workload::Extract),
            "update" => Ok(Workload::Update),
            "mixed" => Ok(Workload::Mixed),
            _ => Err(ConfigError::Unknown {
                what: "workload",
                value: s.to_string(),
            }),
        }
    }
}

/// The timed operation of one CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    /// Extraction only.
    Extract,
    /// Rate update of an outcome chosen by an untimed extraction.
    UpdateExtracted,
    /// Rate update of an outcome chosen uniformly.
    UpdateArbitrary,
    /// One simulation step: extract, then update the extracted outcome.
    Mixed,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Extract => "extract",
            OpKind::UpdateExtracted => "update-extracted",
            OpKind::UpdateArbitrary => "update-arbitrary",
            OpKind::Mixed => "mixed",
        }
    }

    /// Whether the timed region contains an extraction.
    pub fn extracts(self) -> bool {
        matches!(self, OpKind::Extract | OpKind::Mixed)
    }
}

/// One benchmark cell. Rates follow `dist` on [ratio, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub method: Method,
    pub dist: RateDistribution,
    pub n: usize,
    pub ratio: f64,
    pub c: f64,
    pub reps: usize,
    pub ops_per_rep: usize,
    pub seed: u64,
    pub workload: Workload,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            method: Method::Tree,
            dist: RateDistribution::Uniform,
            n: 1000,
            ratio: 1e-3,
            c: 2.0,
            reps: 10_000,
            ops_per_rep: 1000,
            seed: 42,
            workload: Workload::Extract,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field, reason: &str| {
            Err(ConfigError::Invalid {
                field,
                reason: reason.to_string(),
            })
        };
        if self.n < 1 {
            return invalid("n", "need at least one outcome");
        }
        if self.reps < 2 {
            return invalid("reps", "need at least two repetitions");
        }
        if self.ops_per_rep < 1 {
            return invalid("ops", "need at least one operation per repetition");
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return invalid("ratio", &format!("{} is not in (0, 1)", self.ratio));
        }
        if self.method == Method::Cr && !(self.c > 1.0 && self.c.is_finite()) {
            return invalid("c", &format!("{} is not a finite value > 1", self.c));
        }
        Ok(())
    }

    pub fn spec(&self) -> DistributionSpec<f64> {
        DistributionSpec::from_ratio(self.dist, self.ratio, 1.0)
            .expect("ratio validated to lie in (0, 1)")
    }
}
