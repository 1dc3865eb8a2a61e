//! Line-delimited JSON report, one self-describing record per line.
//!
//! Every report starts with a `run` record (schema, configuration, PRF
//! construction, network summary), followed by `table1_row` or `session`
//! records, and ends with a `summary` record for session modes. Reports
//! contain no timestamps or host data, so identical inputs produce
//! byte-identical output.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::session::{EndToEndSummary, SessionRecord, World};
use super::table1::Table1Row;
use super::{ExperimentConfig, Mode};
use crate::crypto::{PRF_CONSTRUCTION, PRF_OUTPUT_BITS};

pub const REPORT_SCHEMA: &str = "ridematch.report/v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrfSummary {
    pub construction: String,
    pub output_bits: u32,
}

impl Default for PrfSummary {
    fn default() -> Self {
        Self {
            construction: PRF_CONSTRUCTION.into(),
            output_bits: PRF_OUTPUT_BITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub source: String,
    pub nodes: usize,
    pub edges: usize,
    pub diameter: u64,
    pub n: usize,
    pub l: u32,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Run {
        schema: String,
        config: ExperimentConfig,
        prf: PrfSummary,
        network: Option<NetworkSummary>,
    },
    Table1Row(Table1Row),
    Session(Box<SessionRecord>),
    Summary(EndToEndSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    fn header(config: &ExperimentConfig, network: Option<NetworkSummary>) -> Record {
        Record::Run {
            schema: REPORT_SCHEMA.into(),
            config: config.clone(),
            prf: PrfSummary::default(),
            network,
        }
    }

    pub fn table1(config: &ExperimentConfig, rows: Vec<Table1Row>) -> Self {
        let mut records = vec![Self::header(config, None)];
        records.extend(rows.into_iter().map(Record::Table1Row));
        Self { records }
    }

    pub fn sessions(
        config: &ExperimentConfig,
        world: &World,
        sessions: Vec<SessionRecord>,
        summary: EndToEndSummary,
    ) -> Self {
        let network = NetworkSummary {
            source: if world.from_file { "file" } else { "grid" }.into(),
            nodes: world.network.node_count(),
            edges: world.network.edges().len(),
            diameter: world.diameter,
            n: world.network.dimension(),
            l: world.params.bits(),
            m: world.params.blocks(),
        };
        let mut records = vec![Self::header(config, Some(network))];
        records.extend(sessions.into_iter().map(|s| Record::Session(Box::new(s))));
        records.push(Record::Summary(summary));
        Self { records }
    }

    pub fn mode(&self) -> Option<Mode> {
        match self.records.first() {
            Some(Record::Run { config, .. }) => Some(config.mode),
            _ => None,
        }
    }

    pub fn table1_rows(&self) -> impl Iterator<Item = &Table1Row> {
        self.records.iter().filter_map(|r| match r {
            Record::Table1Row(row) => Some(row),
            _ => None,
        })
    }

    pub fn sessions_iter(&self) -> impl Iterator<Item = &SessionRecord> {
        self.records.iter().filter_map(|r| match r {
            Record::Session(s) => Some(s.as_ref()),
            _ => None,
        })
    }

    pub fn summary(&self) -> Option<&EndToEndSummary> {
        self.records.iter().find_map(|r| match r {
            Record::Summary(s) => Some(s),
            _ => None,
        })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&serde_json::to_string(record).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> serde_json::Result<Self> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Self { records })
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_jsonl())
    }

    /// Short human-readable summary.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        if let Some(Record::Run { config, network, prf, .. }) = self.records.first() {
            let _ = writeln!(out, "mode {} (seed {}, PRF {}/{})", config.mode.as_str(), config.seed, prf.construction, prf.output_bits);
            if let Some(n) = network {
                let _ = writeln!(
                    out,
                    "network: {} nodes, {} edges, diameter {}, n={} l={} m={}",
                    n.nodes, n.edges, n.diameter, n.n, n.l, n.m
                );
            }
        }
        let rows: Vec<&Table1Row> = self.table1_rows().collect();
        if !rows.is_empty() {
            let _ = writeln!(out, "  l   trials      mean   std.err   2^l*H    ceil  table");
            for r in rows {
                let published = r.published.map_or("-".to_string(), |p| p.to_string());
                let _ = writeln!(
                    out,
                    "{:>3} {:>8} {:>9.3} {:>9.4} {:>7.3} {:>7} {:>6}",
                    r.l, r.trials, r.mean, r.std_err, r.analytic, r.ceiling, published
                );
            }
        }
        if let Some(s) = self.summary() {
            let pct = |k: usize| 100.0 * k as f64 / s.sessions.max(1) as f64;
            let _ = writeln!(out, "sessions: {}", s.sessions);
            let _ = writeln!(out, "  selection = plaintext argmin: {} ({:.1}%)", s.selection_agreements, pct(s.selection_agreements));
            let _ = writeln!(out, "  encrypted distance = plaintext: {} ({:.1}%)", s.distance_agreements, pct(s.distance_agreements));
            if self.sessions_iter().any(|r| r.attacked) {
                let _ = writeln!(out, "  rider vector recovered: {} ({:.1}%)", s.rider_recovered, pct(s.rider_recovered));
                let _ = writeln!(out, "  rider + all drivers exact: {} ({:.1}%)", s.full_recoveries, pct(s.full_recoveries));
                let _ = writeln!(out, "  rider node identified: {} ({:.1}%)", s.rider_node_correct, pct(s.rider_node_correct));
                let _ = writeln!(out, "  mean fraction of blocks recovered: {:.3}", s.mean_block_recovery);
                let _ = writeln!(out, "  sound sessions: {}/{}", s.sound_sessions, s.sessions);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run, ExperimentConfig, Mode};

    #[test]
    fn jsonl_round_trip_and_shape() {
        let cfg = ExperimentConfig { mode: Mode::Table1, l: Some(1), trials: 50, ..Default::default() };
        let report = run(&cfg).unwrap();
        let text = report.to_jsonl();
        assert_eq!(text.lines().count(), 2);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["record"], "run");
        assert_eq!(first["schema"], REPORT_SCHEMA);
        assert_eq!(first["prf"]["construction"], "HMAC-SHA256");
        assert_eq!(first["prf"]["output_bits"], 128);
        assert!(first["config"].get("parallel").is_none());
        let back = Report::from_jsonl(&text).unwrap();
        assert_eq!(back.to_jsonl(), text);
        assert_eq!(back.mode(), Some(Mode::Table1));
        assert!(report.summary_text().contains("table"));
    }

    #[test]
    fn session_report_has_summary_last() {
        let cfg = ExperimentConfig { rows: 3, cols: 3, trials: 2, drivers: 5, ..Default::default() };
        let report = run(&cfg).unwrap();
        assert!(matches!(report.records.last(), Some(Record::Summary(_))));
        assert_eq!(report.sessions_iter().count(), 2);
        let back = Report::from_jsonl(&report.to_jsonl()).unwrap();
        assert_eq!(back.to_jsonl(), report.to_jsonl());
        assert!(report.summary_text().contains("sessions: 2"));
    }
}
