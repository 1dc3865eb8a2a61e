//! End-to-end sessions: one rider, a set of responding drivers, the honest
//! protocol, and (optionally) the service provider's attack on its own
//! transcript.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seed::{child_rng, Stream};
use super::{ExperimentConfig, HarnessError};
use crate::attack::{self, BlockReport, DifferenceLedger};
use crate::codec::{self, BlockParams};
use crate::crypto::{self, SystemKeys};
use crate::protocol::{self, DriverId, RideContext, Selection, ServiceProvider};
use crate::roadnet::{self, EmbeddingTable, NodeId, RneVector, RoadNetwork};

/// Where responding drivers are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriverPlacement {
    /// Random road-network nodes, embedded like the rider.
    #[default]
    GraphNodes,
    /// Synthetic vectors with i.i.d. uniform blocks.
    UniformBlocks,
}

/// Network, embeddings and keys shared by every session of a run.
#[derive(Debug)]
pub struct World {
    pub network: RoadNetwork,
    pub table: EmbeddingTable,
    pub params: BlockParams,
    pub diameter: u64,
    pub from_file: bool,
    keys: SystemKeys,
}

impl World {
    pub fn keys(&self) -> &SystemKeys {
        &self.keys
    }
}

pub fn build_world(config: &ExperimentConfig) -> Result<World, HarnessError> {
    let (network, from_file) = match &config.network_file {
        Some(path) => (RoadNetwork::load(path)?, true),
        None => {
            let mut rng = child_rng(config.seed, Stream::Network, 0);
            let net = roadnet::generate_grid_network(
                config.rows,
                config.cols,
                config.weight_min..=config.weight_max,
                rng.gen(),
            )?;
            let landmarks = net.sample_singleton_landmarks(config.n, rng.gen());
            (net.with_landmarks(landmarks)?, false)
        }
    };
    let diameter = network.diameter();
    let l = config.block_bits();
    let params = match config.m {
        Some(m) => BlockParams::new(l, m)?,
        None => BlockParams::covering(l, diameter)?,
    };
    let table = EmbeddingTable::build(&network, params)?;
    let keys = crypto::key_manager_issue(child_rng(config.seed, Stream::Keys, 0).gen());
    Ok(World {
        network,
        table,
        params,
        diameter,
        from_file,
        keys,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session: usize,
    pub rider_node: NodeId,
    pub drivers: usize,
    pub requests: usize,
    pub selected: Selection,
    pub plaintext: Selection,
    pub selection_agrees: bool,
    pub distances_agree: bool,
    pub attacked: bool,
    pub blocks_recovered: usize,
    pub blocks_total: usize,
    pub rider_recovered: bool,
    pub rider_correct: bool,
    pub drivers_recovered: usize,
    pub drivers_correct: usize,
    /// Rider and every driver recovered bit-exactly.
    pub full_recovery: bool,
    /// No reported interval or recovered value contradicts ground truth.
    pub sound: bool,
    pub rider_node_recovered: Option<NodeId>,
    pub rider_node_ambiguity: Option<usize>,
    /// Recovered node embeds to the rider's true vector.
    pub rider_node_correct: Option<bool>,
    pub driver_nodes_correct: Option<usize>,
    pub recovered_rider_vector: Option<RneVector>,
    pub blocks: Vec<BlockReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndToEndSummary {
    pub sessions: usize,
    pub selection_agreements: usize,
    pub distance_agreements: usize,
    pub rider_recovered: usize,
    pub full_recoveries: usize,
    /// Sessions where every block reached uniqueness.
    pub fully_determined: usize,
    pub fully_determined_and_exact: usize,
    pub sound_sessions: usize,
    pub rider_node_correct: usize,
    pub mean_block_recovery: f64,
}

impl EndToEndSummary {
    fn from_records(records: &[SessionRecord]) -> Self {
        let count = |f: &dyn Fn(&SessionRecord) -> bool| records.iter().filter(|r| f(r)).count();
        let fraction: f64 = records
            .iter()
            .map(|r| r.blocks_recovered as f64 / r.blocks_total.max(1) as f64)
            .sum();
        Self {
            sessions: records.len(),
            selection_agreements: count(&|r| r.selection_agrees),
            distance_agreements: count(&|r| r.distances_agree),
            rider_recovered: count(&|r| r.rider_recovered),
            full_recoveries: count(&|r| r.full_recovery),
            fully_determined: count(&|r| r.attacked && r.blocks_recovered == r.blocks_total),
            fully_determined_and_exact: count(&|r| {
                r.attacked && r.blocks_recovered == r.blocks_total && r.full_recovery
            }),
            sound_sessions: count(&|r| r.sound),
            rider_node_correct: count(&|r| r.rider_node_correct == Some(true)),
            mean_block_recovery: fraction / records.len().max(1) as f64,
        }
    }
}

fn place_driver<R: Rng>(
    placement: DriverPlacement,
    world: &World,
    rng: &mut R,
) -> Result<RneVector, HarnessError> {
    Ok(match placement {
        DriverPlacement::GraphNodes => {
            let node = rng.gen_range(0..world.network.node_count());
            world.table.get(node).expect("node in table").clone()
        }
        DriverPlacement::UniformBlocks => {
            let p = world.params;
            let mut coords = Vec::with_capacity(world.network.dimension());
            for _ in 0..world.network.dimension() {
                let blocks: Vec<u32> = (0..p.blocks()).map(|_| rng.gen_range(0..p.radix())).collect();
                coords.push(codec::recompose(&blocks, p)?);
            }
            RneVector::new(coords)
        }
    })
}

fn plaintext_selection(rider: &RneVector, drivers: &[(DriverId, &RneVector)]) -> Result<Selection, HarnessError> {
    let mut best: Option<Selection> = None;
    for &(driver, v) in drivers {
        let distance = roadnet::rne_distance(rider, v)?;
        if best.is_none_or(|b| (distance, driver) < (b.distance, b.driver)) {
            best = Some(Selection { driver, distance });
        }
    }
    best.ok_or(HarnessError::Config("no drivers".into()))
}

/// One session. With `attack` set, the service provider's transcript is fed
/// into the difference ledger and the recovery is checked against ground truth.
pub fn run_session(
    config: &ExperimentConfig,
    world: &World,
    index: usize,
    attack: bool,
) -> Result<SessionRecord, HarnessError> {
    let mut rng = child_rng(config.seed, Stream::Session, index as u64);
    let dim = world.network.dimension();
    let ctx = RideContext::new(config.zone, config.slot, world.params, dim);
    let rider_node = rng.gen_range(0..world.network.node_count());
    let rider = world.table.get(rider_node).expect("node in table").clone();

    let mut ledger = DifferenceLedger::new(world.params, dim);
    let mut truth: BTreeMap<DriverId, RneVector> = BTreeMap::new();
    let mut first: Option<(Selection, Selection)> = None;
    let mut selection_agrees = true;
    let mut distances_agree = true;

    for r in 0..config.merge_requests {
        let request = protocol::rider_encrypt(&rider, world.keys(), &ctx, &mut rng)?;
        let mut responses = Vec::with_capacity(config.drivers);
        let mut placed = Vec::with_capacity(config.drivers);
        for k in 0..config.drivers {
            let id = DriverId((r * config.drivers + k) as u32);
            let driver = place_driver(config.placement, world, &mut rng)?;
            responses.push(protocol::driver_encrypt(id, &driver, world.keys(), &ctx, &mut rng)?);
            placed.push((id, driver));
        }

        let mut sp = ServiceProvider::new();
        let transcript = sp.handle_request(&request, &responses)?;

        let views: Vec<(DriverId, &RneVector)> = placed.iter().map(|(id, d)| (*id, d)).collect();
        let plain = plaintext_selection(&rider, &views)?;
        selection_agrees &= transcript.selection == plain;
        for ((id, diffs), (pid, v)) in transcript.differences.iter().zip(&views) {
            let encrypted = protocol::sp_compute_distance(diffs)?;
            distances_agree &= id == pid && encrypted == roadnet::rne_distance(&rider, v)?;
        }
        first.get_or_insert((transcript.selection, plain));

        if attack {
            ledger.ingest_transcript(transcript)?;
        }
        truth.extend(placed);
    }
    let (selected, plaintext) = first.expect("merge_requests >= 1");

    let mut record = SessionRecord {
        session: index,
        rider_node,
        drivers: truth.len(),
        requests: config.merge_requests,
        selected,
        plaintext,
        selection_agrees,
        distances_agree,
        attacked: attack,
        blocks_recovered: 0,
        blocks_total: ctx.block_count(),
        rider_recovered: false,
        rider_correct: false,
        drivers_recovered: 0,
        drivers_correct: 0,
        full_recovery: false,
        sound: true,
        rider_node_recovered: None,
        rider_node_ambiguity: None,
        rider_node_correct: None,
        driver_nodes_correct: None,
        recovered_rider_vector: None,
        blocks: Vec::new(),
    };
    if !attack {
        return Ok(record);
    }

    let report = attack::run_attack(&ledger, config.recovery_mode(), Some(&world.table))?;
    let rider_blocks = rider.blocks(world.params)?;
    let intervals_sound = report
        .blocks
        .iter()
        .all(|b| (b.lo..=b.hi).contains(&rider_blocks[b.label.coord()][b.label.block()]));

    record.blocks_recovered = report.blocks_recovered;
    record.rider_recovered = report.rider_vector.is_some();
    record.rider_correct = report.rider_vector.as_ref() == Some(&rider);
    record.drivers_recovered = report.driver_vectors.len();
    record.drivers_correct = report
        .driver_vectors
        .iter()
        .filter(|(id, v)| truth.get(id) == Some(*v))
        .count();
    record.full_recovery = record.rider_correct && record.drivers_correct == truth.len();
    record.sound = intervals_sound
        && (!record.rider_recovered || record.rider_correct)
        && record.drivers_correct == record.drivers_recovered;
    if let Some(found) = report.rider_node {
        record.rider_node_recovered = Some(found.node);
        record.rider_node_ambiguity = Some(found.ambiguity);
        record.rider_node_correct = Some(world.table.get(found.node) == Some(&rider));
    }
    if config.placement == DriverPlacement::GraphNodes && record.rider_recovered {
        record.driver_nodes_correct = Some(
            report
                .driver_nodes
                .iter()
                .filter(|(id, found)| {
                    truth
                        .get(id)
                        .is_some_and(|t| world.table.get(found.node) == Some(t))
                })
                .count(),
        );
    }
    record.recovered_rider_vector = report.rider_vector;
    record.blocks = report.blocks;
    Ok(record)
}

fn run_sessions(
    config: &ExperimentConfig,
    world: &World,
    attack: bool,
) -> Result<(Vec<SessionRecord>, EndToEndSummary), HarnessError> {
    let records: Vec<SessionRecord> = if config.parallel {
        (0..config.trials)
            .into_par_iter()
            .map(|i| run_session(config, world, i, attack))
            .collect::<Result<_, _>>()?
    } else {
        (0..config.trials)
            .map(|i| run_session(config, world, i, attack))
            .collect::<Result<_, _>>()?
    };
    let summary = EndToEndSummary::from_records(&records);
    Ok((records, summary))
}

pub fn run_end_to_end(
    config: &ExperimentConfig,
    world: &World,
) -> Result<(Vec<SessionRecord>, EndToEndSummary), HarnessError> {
    run_sessions(config, world, true)
}

pub fn run_protocol_only(
    config: &ExperimentConfig,
    world: &World,
) -> Result<(Vec<SessionRecord>, EndToEndSummary), HarnessError> {
    run_sessions(config, world, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Mode;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            rows: 4,
            cols: 4,
            weight_max: 6,
            trials: 4,
            l: Some(2),
            ..Default::default()
        }
    }

    #[test]
    fn world_sizes_blocks_to_diameter() {
        let world = build_world(&config()).unwrap();
        assert!(world.params.max_value() >= world.diameter);
        assert!(world.params.blocks() == 1 || (1u64 << (world.params.total_bits() - 2)) <= world.diameter);
        assert_eq!(world.network.dimension(), 8);
    }

    #[test]
    fn undersized_blocks_are_a_capacity_error() {
        let cfg = ExperimentConfig { m: Some(1), weight_min: 10, weight_max: 10, ..config() };
        assert!(matches!(build_world(&cfg), Err(HarnessError::Roadnet(_))));
    }

    #[test]
    fn single_driver_at_rider_node_recovers_nothing() {
        // a one-node network puts every driver on the rider's node
        let cfg = ExperimentConfig { rows: 1, cols: 1, drivers: 1, trials: 1, ..config() };
        let world = build_world(&cfg).unwrap();
        let rec = run_session(&cfg, &world, 0, true).unwrap();
        assert_eq!(rec.blocks_recovered, 0);
        assert!(!rec.rider_recovered);
        assert!(rec.sound);
        assert!(rec.selection_agrees && rec.distances_agree);
    }

    #[test]
    fn many_uniform_drivers_recover_everything() {
        let cfg = ExperimentConfig {
            drivers: 60,
            placement: DriverPlacement::UniformBlocks,
            strict_lemma: true,
            ..config()
        };
        let world = build_world(&cfg).unwrap();
        for i in 0..3 {
            let rec = run_session(&cfg, &world, i, true).unwrap();
            assert!(rec.full_recovery, "{rec:?}");
            assert_eq!(rec.rider_node_correct, Some(true));
            assert_eq!(rec.drivers_correct, 60);
        }
    }

    #[test]
    fn merged_requests_pool_observations() {
        let base = ExperimentConfig { drivers: 3, trials: 1, ..config() };
        let world = build_world(&base).unwrap();
        let single = run_session(&base, &world, 0, true).unwrap();
        let merged = ExperimentConfig { merge_requests: 6, ..base };
        let pooled = run_session(&merged, &world, 0, true).unwrap();
        assert_eq!(pooled.drivers, 18);
        assert!(pooled.blocks_recovered >= single.blocks_recovered);
        assert!(pooled.sound);
    }

    #[test]
    fn protocol_only_skips_attack() {
        let cfg = ExperimentConfig { mode: Mode::ProtocolOnly, ..config() };
        let world = build_world(&cfg).unwrap();
        let (records, summary) = run_protocol_only(&cfg, &world).unwrap();
        assert_eq!(records.len(), 4);
        assert!(records.iter().all(|r| !r.attacked && r.blocks.is_empty()));
        assert_eq!(summary.selection_agreements, 4);
    }
}
