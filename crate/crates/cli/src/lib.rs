//! Command-line front end for the ridematch experiments.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use ridematch_core::harness::{
    self, DriverPlacement, ExperimentConfig, HarnessError, Mode, DEFAULT_OUT_DIR, OUT_DIR_ENV,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    #[value(name = "table1")]
    Table1,
    #[value(name = "end_to_end")]
    EndToEnd,
    #[value(name = "protocol_only")]
    ProtocolOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlacementArg {
    #[value(name = "graph")]
    Graph,
    #[value(name = "uniform")]
    Uniform,
}

/// Encrypted ride-matching simulator and passive location-recovery attack.
#[derive(Debug, Parser)]
#[command(name = "ridematch", version)]
struct Args {
    /// Experiment to run.
    #[arg(long, value_enum, default_value = "end_to_end")]
    mode: ModeArg,
    /// Block width in bits. Table1 mode runs 1..=4 when omitted.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4))]
    l: Option<u32>,
    /// Blocks per coordinate; sized to the network diameter when omitted.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=62))]
    m: Option<u32>,
    /// Embedding dimension (number of singleton landmarks).
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=4096))]
    n: u64,
    /// Monte Carlo trials (table1) or sessions (other modes).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    /// Responding drivers per ride request.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..=1_000_000))]
    drivers: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Report path. Defaults to $RIDEMATCH_OUT_DIR (or ./reports)/<mode>-seed<seed>.jsonl.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Road network file instead of a generated grid.
    #[arg(long)]
    network_file: Option<PathBuf>,
    /// Count a block as recovered only once all 2^l values were observed.
    #[arg(long)]
    strict_lemma: bool,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=1000))]
    rows: u64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=1000))]
    cols: u64,
    #[arg(long, default_value_t = 1)]
    weight_min: u64,
    #[arg(long, default_value_t = 10)]
    weight_max: u64,
    /// Driver placement for session modes.
    #[arg(long, value_enum, default_value = "graph")]
    placement: PlacementArg,
    /// Ride requests of the same rider merged into one ledger.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1000))]
    merge_requests: u64,
    #[arg(long, default_value_t = 1)]
    zone: u32,
    #[arg(long, default_value_t = 1)]
    slot: u32,
    /// Run trials on a single thread. Results are identical either way.
    #[arg(long)]
    serial: bool,
}

const DEFAULT_TABLE1_TRIALS: usize = 100_000;
const DEFAULT_SESSIONS: usize = 100;

impl Args {
    fn config(&self) -> ExperimentConfig {
        let mode = match self.mode {
            ModeArg::Table1 => Mode::Table1,
            ModeArg::EndToEnd => Mode::EndToEnd,
            ModeArg::ProtocolOnly => Mode::ProtocolOnly,
        };
        let default_trials = if mode == Mode::Table1 {
            DEFAULT_TABLE1_TRIALS
        } else {
            DEFAULT_SESSIONS
        };
        ExperimentConfig {
            mode,
            l: self.l,
            m: self.m,
            n: self.n as usize,
            rows: self.rows as usize,
            cols: self.cols as usize,
            weight_min: self.weight_min,
            weight_max: self.weight_max,
            network_file: self.network_file.clone(),
            drivers: self.drivers as usize,
            trials: self.trials.map_or(default_trials, |t| t as usize),
            seed: self.seed,
            strict_lemma: self.strict_lemma,
            placement: match self.placement {
                PlacementArg::Graph => DriverPlacement::GraphNodes,
                PlacementArg::Uniform => DriverPlacement::UniformBlocks,
            },
            merge_requests: self.merge_requests as usize,
            zone: self.zone,
            slot: self.slot,
            parallel: !self.serial,
        }
    }

    fn out_path(&self, config: &ExperimentConfig) -> PathBuf {
        match &self.out {
            Some(p) => p.clone(),
            None => {
                let dir = std::env::var_os(OUT_DIR_ENV)
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
                dir.join(config.report_file_name())
            }
        }
    }
}

/// Parse `argv`, run the experiment, write the report and print a summary.
/// Returns the process exit code: 0 on success, 2 on usage or configuration
/// errors, 1 on any other failure.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let config = args.config();
    let report = match harness::run(&config) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return match e {
                HarnessError::Config(_) | HarnessError::Codec(_) => 2,
                _ => 1,
            };
        }
    };
    let path = args.out_path(&config);
    if let Err(e) = report.write_to(&path) {
        let _ = writeln!(stderr, "error: writing {}: {e}", path.display());
        return 1;
    }
    let _ = write!(stdout, "{}", report.summary_text());
    let _ = writeln!(stdout, "report: {}", path.display());
    0
}
