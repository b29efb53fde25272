//! Instance files, random markets, the first-stage comparison experiment and
//! the `rotcut` command line.

pub mod dump;
pub mod experiment;
pub mod format;
pub mod generate;

pub use dump::{dump_digraph, dump_rotations};
pub use experiment::{
    gap_trend, run_experiment, write_csv, CostMode, ExperimentConfig, ExperimentRow, GapTrend, CSV_HEADER,
};
pub use format::{parse_instance, serialize, InstanceFile};
pub use generate::{generate_random, QuotaMode};

use matching_core::{InstanceError, ParseError};
use mincut_framework::{int, FrameworkError, Rational};
use siblings_apps::SiblingError;
use thiserror::Error;
use two_stage::TwoStageError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Sibling(#[from] SiblingError),
    #[error(transparent)]
    TwoStage(#[from] TwoStageError),
    #[error(transparent)]
    Framework(#[from] FrameworkError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Config(String),
    #[error("row {trial}/{lambda} breaks the optimality relations")]
    Relation { trial: usize, lambda: String },
}

/// Integers, `p/q` and finite decimals such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational, IoError> {
    let bad = || IoError::Config(format!("`{s}` is not a number"));
    match s.split_once('.') {
        Some((whole, frac)) => {
            if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let digits: Rational = format!("{whole}{frac}").parse().map_err(|_| bad())?;
            Ok(digits / (0..frac.len()).fold(int(1), |acc, _| acc * int(10)))
        }
        None => s.parse().map_err(|_| bad()),
    }
}
