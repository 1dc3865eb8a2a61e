//! Seeded experiments and their line-delimited reports.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{AttackError, RecoveryMode};
use crate::codec::CodecError;
use crate::protocol::ProtocolError;
use crate::roadnet::RoadnetError;

mod report;
mod seed;
mod session;
mod table1;

pub use report::{Record, Report, NetworkSummary, PrfSummary, REPORT_SCHEMA};
pub use seed::{child_rng, Stream};
pub use session::{
    build_world, run_end_to_end, run_protocol_only, run_session, DriverPlacement, EndToEndSummary,
    SessionRecord, World,
};
pub use table1::{analytic_expectation, draws_to_full_coverage, run_table1, PUBLISHED_COUNTS, Table1Row};

/// Environment variable that overrides the default report directory.
pub const OUT_DIR_ENV: &str = "RIDEMATCH_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "reports";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Roadnet(#[from] RoadnetError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Table1,
    EndToEnd,
    ProtocolOnly,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Table1 => "table1",
            Mode::EndToEnd => "end_to_end",
            Mode::ProtocolOnly => "protocol_only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Block width. `None` in table1 mode runs every supported width.
    pub l: Option<u32>,
    /// Blocks per coordinate. `None` sizes `m` to the network diameter.
    pub m: Option<u32>,
    /// Embedding dimension (number of singleton landmarks).
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub weight_min: u64,
    pub weight_max: u64,
    pub network_file: Option<PathBuf>,
    pub drivers: usize,
    pub trials: usize,
    pub seed: u64,
    pub strict_lemma: bool,
    pub placement: DriverPlacement,
    /// Ride requests by the same rider merged into one ledger; 1 disables merging.
    pub merge_requests: usize,
    pub zone: u32,
    pub slot: u32,
    /// Execution strategy only; never changes results, so it is not reported.
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::EndToEnd,
            l: None,
            m: None,
            n: crate::roadnet::DEFAULT_DIMENSION,
            rows: 8,
            cols: 8,
            weight_min: 1,
            weight_max: 10,
            network_file: None,
            drivers: 64,
            trials: 100,
            seed: 1,
            strict_lemma: false,
            placement: DriverPlacement::GraphNodes,
            merge_requests: 1,
            zone: 1,
            slot: 1,
            parallel: true,
        }
    }
}

pub const SUPPORTED_BLOCK_BITS: std::ops::RangeInclusive<u32> = 1..=4;
pub const DEFAULT_BLOCK_BITS: u32 = 2;

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if let Some(l) = self.l {
            if !SUPPORTED_BLOCK_BITS.contains(&l) {
                return bad(format!("l = {l} outside 1..=4"));
            }
        }
        if self.m == Some(0) {
            return bad("m must be at least 1".into());
        }
        if self.mode == Mode::Table1 {
            return Ok(());
        }
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.drivers == 0 {
            return bad("at least one driver must respond".into());
        }
        if self.merge_requests == 0 {
            return bad("merge_requests must be at least 1".into());
        }
        if self.network_file.is_none() {
            if self.rows == 0 || self.cols == 0 {
                return bad("grid must have at least one row and column".into());
            }
            if self.weight_min > self.weight_max {
                return bad(format!(
                    "empty weight range {}..={}",
                    self.weight_min, self.weight_max
                ));
            }
        }
        Ok(())
    }

    pub fn block_bits(&self) -> u32 {
        self.l.unwrap_or(DEFAULT_BLOCK_BITS)
    }

    pub fn recovery_mode(&self) -> RecoveryMode {
        if self.strict_lemma {
            RecoveryMode::StrictLemma
        } else {
            RecoveryMode::Interval
        }
    }

    /// Default report file name for this configuration.
    pub fn report_file_name(&self) -> String {
        format!("{}-seed{}.jsonl", self.mode.as_str(), self.seed)
    }
}

/// Run the configured experiment and collect its report.
pub fn run(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    config.validate()?;
    match config.mode {
        Mode::Table1 => {
            let widths: Vec<u32> = match config.l {
                Some(l) => vec![l],
                None => SUPPORTED_BLOCK_BITS.collect(),
            };
            let rows = widths
                .into_iter()
                .map(|l| run_table1(l, config.trials, config.seed, config.parallel))
                .collect();
            Ok(Report::table1(config, rows))
        }
        Mode::EndToEnd => {
            let world = build_world(config)?;
            let (sessions, summary) = run_end_to_end(config, &world)?;
            Ok(Report::sessions(config, &world, sessions, summary))
        }
        Mode::ProtocolOnly => {
            let world = build_world(config)?;
            let (sessions, summary) = run_protocol_only(config, &world)?;
            Ok(Report::sessions(config, &world, sessions, summary))
        }
    }
}
