//! Passive location recovery by the honest-but-curious service provider.
//!
//! Matching hands the service provider `(b_k - x) * w_j` for every block of
//! every responding driver `k`, where `x` is the rider's block. Dividing out
//! the weight yields signed differences `d_k = b_k - x`. Since every `b_k`
//! lies in `[0, 2^l)`, `x` is confined to
//!
//! ```text
//! [ max_k(-d_k), min_k(2^l - 1 - d_k) ]  intersected with  [0, 2^l - 1]
//! ```
//!
//! Once all `2^l` values have been observed the interval collapses to
//! `x = -min_k d_k`; it already collapses whenever `max d - min d = 2^l - 1`.
//! With the rider's blocks known, each driver block is `x + d_k`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{self, BlockParams, CodecError, SignedPayload};
use crate::protocol::{BlockDifferences, BlockLabel, DriverId, SessionTranscript};
use crate::roadnet::{self, EmbeddingTable, NodeId, RneVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("payload {payload} at {label} is not a multiple of weight {weight}")]
    NonDivisible {
        label: BlockLabel,
        payload: i64,
        weight: i64,
    },
    #[error("difference {diff} outside +/-{max}")]
    DifferenceOutOfRange { diff: i64, max: i64 },
    #[error("label {0} outside the ledger dimensions")]
    UnknownLabel(BlockLabel),
    #[error("no observed differences")]
    NoObservations,
    #[error("observed differences admit no block value at {0}")]
    Inconsistent(BlockLabel),
    #[error("ledgers have different parameters")]
    ParamsMismatch,
    #[error("rider vector has dimension {got}, ledger expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("{driver} has {count} observations at {label}, expected exactly one")]
    DriverObservations {
        driver: DriverId,
        label: BlockLabel,
        count: usize,
    },
    #[error("recovered block {value} of {driver} at {label} is outside [0, 2^l)")]
    DriverBlockOutOfRange {
        driver: DriverId,
        label: BlockLabel,
        value: i64,
    },
    #[error("embedding table is empty")]
    EmptyTable,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Per-block signed differences `b_driver - b_rider` collected across
/// responding drivers, in arrival order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferenceLedger {
    params: BlockParams,
    dim: usize,
    entries: BTreeMap<BlockLabel, Vec<(DriverId, i64)>>,
}

impl DifferenceLedger {
    pub fn new(params: BlockParams, dim: usize) -> Self {
        Self {
            params,
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn params(&self) -> BlockParams {
        self.params
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> impl Iterator<Item = BlockLabel> {
        let blocks = self.params.blocks() as usize;
        (0..self.dim).flat_map(move |i| (0..blocks).map(move |j| BlockLabel::new(i, j)))
    }

    /// Normalize `payload` by `w_j` and append it under `label`.
    pub fn record(
        &mut self,
        label: BlockLabel,
        driver: DriverId,
        payload: SignedPayload,
    ) -> Result<i64, AttackError> {
        if label.coord() >= self.dim || label.block() >= self.params.blocks() as usize {
            return Err(AttackError::UnknownLabel(label));
        }
        let weight = self.params.weight(label.block());
        let payload = payload.value();
        if payload % weight != 0 {
            return Err(AttackError::NonDivisible {
                label,
                payload,
                weight,
            });
        }
        let diff = payload / weight;
        let max = i64::from(self.params.max_block());
        if diff.abs() > max {
            return Err(AttackError::DifferenceOutOfRange { diff, max });
        }
        self.entries.entry(label).or_default().push((driver, diff));
        Ok(diff)
    }

    /// Record every block difference of one driver.
    pub fn ingest(&mut self, driver: DriverId, diffs: &BlockDifferences) -> Result<(), AttackError> {
        for (&label, &payload) in &diffs.diffs {
            self.record(label, driver, payload)?;
        }
        Ok(())
    }

    /// Record everything the service provider saw in one session.
    pub fn ingest_transcript(&mut self, transcript: &SessionTranscript) -> Result<(), AttackError> {
        for (driver, diffs) in &transcript.differences {
            self.ingest(*driver, diffs)?;
        }
        Ok(())
    }

    /// Append another ledger's observations (same rider, same session scope).
    pub fn merge(&mut self, other: &DifferenceLedger) -> Result<(), AttackError> {
        if other.params != self.params || other.dim != self.dim {
            return Err(AttackError::ParamsMismatch);
        }
        for (label, obs) in &other.entries {
            self.entries.entry(*label).or_default().extend_from_slice(obs);
        }
        Ok(())
    }

    pub fn observations(&self, label: BlockLabel) -> &[(DriverId, i64)] {
        self.entries.get(&label).map_or(&[], Vec::as_slice)
    }

    pub fn differences(&self, label: BlockLabel) -> Vec<i64> {
        self.observations(label).iter().map(|&(_, d)| d).collect()
    }

    pub fn drivers(&self) -> BTreeSet<DriverId> {
        self.entries
            .values()
            .flatten()
            .map(|&(driver, _)| driver)
            .collect()
    }
}

/// Inclusive range of block values consistent with the observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: u32,
    pub hi: u32,
}

impl Interval {
    pub fn full(params: BlockParams) -> Self {
        Self {
            lo: 0,
            hi: params.max_block(),
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> u32 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: u32) -> bool {
        (self.lo..=self.hi).contains(&x)
    }
}

fn constrain(diffs: &[i64], bits: u32) -> Result<Option<Interval>, AttackError> {
    let max = (1i64 << bits) - 1;
    let mut lo = 0i64;
    let mut hi = max;
    for &d in diffs {
        if d.abs() > max {
            return Err(AttackError::DifferenceOutOfRange { diff: d, max });
        }
        lo = lo.max(-d);
        hi = hi.min(max - d);
    }
    Ok((lo <= hi).then_some(Interval {
        lo: lo as u32,
        hi: hi as u32,
    }))
}

/// Range of rider block values `x` with `x + d` in `[0, 2^l)` for every
/// observed difference `d`.
pub fn recover_block(diffs: &[i64], bits: u32) -> Result<Interval, AttackError> {
    if diffs.is_empty() {
        return Err(AttackError::NoObservations);
    }
    constrain(diffs, bits)?.ok_or(AttackError::Inconsistent(BlockLabel::new(0, 0)))
}

/// When a block counts as uniquely recovered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMode {
    /// The consistent interval has narrowed to one value.
    #[default]
    Interval,
    /// All `2^l` distinct differences have been observed.
    StrictLemma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockEstimate {
    pub interval: Interval,
    pub observations: usize,
    pub distinct: usize,
}

impl BlockEstimate {
    pub fn is_determined(&self, mode: RecoveryMode, params: BlockParams) -> bool {
        match mode {
            RecoveryMode::Interval => self.interval.is_point(),
            RecoveryMode::StrictLemma => self.distinct == params.radix() as usize,
        }
    }
}

fn estimate(label: BlockLabel, diffs: &[i64], params: BlockParams) -> Result<BlockEstimate, AttackError> {
    let interval = constrain(diffs, params.bits())?.ok_or(AttackError::Inconsistent(label))?;
    let distinct = diffs.iter().collect::<BTreeSet<_>>().len();
    Ok(BlockEstimate {
        interval,
        observations: diffs.len(),
        distinct,
    })
}

/// Consistent rider block values for every `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCandidates {
    pub mode: RecoveryMode,
    pub blocks: BTreeMap<BlockLabel, BlockEstimate>,
}

impl BlockCandidates {
    pub fn determined_count(&self, params: BlockParams) -> usize {
        self.blocks
            .values()
            .filter(|e| e.is_determined(self.mode, params))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiderRecovery {
    pub vector: Option<RneVector>,
    pub candidates: BlockCandidates,
}

/// Narrow every rider block; recompose the vector once all are determined.
pub fn recover_rider_vector(
    ledger: &DifferenceLedger,
    mode: RecoveryMode,
) -> Result<RiderRecovery, AttackError> {
    let params = ledger.params();
    let mut blocks = BTreeMap::new();
    for label in ledger.labels() {
        blocks.insert(label, estimate(label, &ledger.differences(label), params)?);
    }
    let candidates = BlockCandidates { mode, blocks };
    let all_determined = candidates
        .blocks
        .values()
        .all(|e| e.is_determined(mode, params));
    let vector = if all_determined {
        let mut coords = Vec::with_capacity(ledger.dimension());
        for i in 0..ledger.dimension() {
            let row: Vec<u32> = (0..params.blocks() as usize)
                .map(|j| candidates.blocks[&BlockLabel::new(i, j)].interval.lo)
                .collect();
            coords.push(codec::recompose(&row, params)?);
        }
        Some(RneVector::new(coords))
    } else {
        None
    };
    Ok(RiderRecovery { vector, candidates })
}

/// Every driver's vector from the recovered rider vector and the ledger.
pub fn recover_driver_vectors(
    ledger: &DifferenceLedger,
    rider: &RneVector,
) -> Result<BTreeMap<DriverId, RneVector>, AttackError> {
    if rider.dimension() != ledger.dimension() {
        return Err(AttackError::Dimension {
            expected: ledger.dimension(),
            got: rider.dimension(),
        });
    }
    let params = ledger.params();
    let rider_blocks = rider.blocks(params)?;
    let mut driver_blocks: BTreeMap<DriverId, BTreeMap<BlockLabel, Vec<u32>>> = BTreeMap::new();
    for label in ledger.labels() {
        let x = i64::from(rider_blocks[label.coord()][label.block()]);
        for &(driver, d) in ledger.observations(label) {
            let value = x + d;
            if !(0..i64::from(params.radix())).contains(&value) {
                return Err(AttackError::DriverBlockOutOfRange {
                    driver,
                    label,
                    value,
                });
            }
            driver_blocks
                .entry(driver)
                .or_default()
                .entry(label)
                .or_default()
                .push(value as u32);
        }
    }

    let mut out = BTreeMap::new();
    for (driver, by_label) in driver_blocks {
        let mut coords = Vec::with_capacity(ledger.dimension());
        for i in 0..ledger.dimension() {
            let mut row = Vec::with_capacity(params.blocks() as usize);
            for j in 0..params.blocks() as usize {
                let label = BlockLabel::new(i, j);
                match by_label.get(&label).map(Vec::as_slice) {
                    Some(&[b]) => row.push(b),
                    other => {
                        return Err(AttackError::DriverObservations {
                            driver,
                            label,
                            count: other.map_or(0, <[u32]>::len),
                        })
                    }
                }
            }
            coords.push(codec::recompose(&row, params)?);
        }
        out.insert(driver, RneVector::new(coords));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deanonymized {
    pub node: NodeId,
    /// Number of nodes tied with `node`.
    pub ambiguity: usize,
    /// Whether `node`'s embedding equals the vector exactly.
    pub exact: bool,
}

/// Map an embedding back to a road-network node.
///
/// Exact matches win, lowest id first. Otherwise the nearest node under the
/// max-metric is returned, again lowest id first.
pub fn deanonymize(vector: &RneVector, table: &EmbeddingTable) -> Result<Deanonymized, AttackError> {
    if table.is_empty() {
        return Err(AttackError::EmptyTable);
    }
    let mut best: Option<(u64, NodeId)> = None;
    let mut ties = 0;
    for (node, emb) in table.iter() {
        let d = roadnet::rne_distance(vector, emb).map_err(|_| AttackError::Dimension {
            expected: emb.dimension(),
            got: vector.dimension(),
        })?;
        match best {
            Some((bd, _)) if d > bd => {}
            Some((bd, _)) if d == bd => ties += 1,
            _ => {
                best = Some((d, node));
                ties = 1;
            }
        }
    }
    let (d, node) = best.expect("table is non-empty");
    Ok(Deanonymized {
        node,
        ambiguity: ties,
        exact: d == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockReport {
    pub label: BlockLabel,
    pub lo: u32,
    pub hi: u32,
    pub width: u32,
    pub distinct: usize,
    /// Observations after which the block became determined.
    pub unique_after: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub mode: RecoveryMode,
    pub rider_vector: Option<RneVector>,
    pub driver_vectors: BTreeMap<DriverId, RneVector>,
    pub rider_node: Option<Deanonymized>,
    pub driver_nodes: BTreeMap<DriverId, Deanonymized>,
    pub blocks_recovered: usize,
    pub blocks_total: usize,
    pub blocks: Vec<BlockReport>,
}

fn unique_after(diffs: &[i64], mode: RecoveryMode, params: BlockParams) -> Result<Option<usize>, AttackError> {
    let mut seen = BTreeSet::new();
    for (k, &d) in diffs.iter().enumerate() {
        seen.insert(d);
        let hit = match mode {
            RecoveryMode::StrictLemma => seen.len() == params.radix() as usize,
            RecoveryMode::Interval => {
                let (min, max) = (*seen.first().expect("non-empty"), *seen.last().expect("non-empty"));
                max - min == i64::from(params.max_block())
            }
        };
        if hit {
            return Ok(Some(k + 1));
        }
    }
    Ok(None)
}

/// Full attack over one ledger: rider blocks, driver vectors and, given an
/// embedding table, the nodes they map to.
pub fn run_attack(
    ledger: &DifferenceLedger,
    mode: RecoveryMode,
    table: Option<&EmbeddingTable>,
) -> Result<RecoveryReport, AttackError> {
    let params = ledger.params();
    let rider = recover_rider_vector(ledger, mode)?;
    let driver_vectors = match &rider.vector {
        Some(v) => recover_driver_vectors(ledger, v)?,
        None => BTreeMap::new(),
    };
    let (rider_node, driver_nodes) = match (table, &rider.vector) {
        (Some(table), Some(v)) => {
            let mut nodes = BTreeMap::new();
            for (driver, dv) in &driver_vectors {
                nodes.insert(*driver, deanonymize(dv, table)?);
            }
            (Some(deanonymize(v, table)?), nodes)
        }
        _ => (None, BTreeMap::new()),
    };
    let mut blocks = Vec::new();
    for (label, est) in &rider.candidates.blocks {
        blocks.push(BlockReport {
            label: *label,
            lo: est.interval.lo,
            hi: est.interval.hi,
            width: est.interval.width(),
            distinct: est.distinct,
            unique_after: unique_after(&ledger.differences(*label), mode, params)?,
        });
    }
    Ok(RecoveryReport {
        mode,
        blocks_recovered: rider.candidates.determined_count(params),
        blocks_total: blocks.len(),
        rider_vector: rider.vector,
        driver_vectors,
        rider_node,
        driver_nodes,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: u32, m: u32) -> BlockParams {
        BlockParams::new(l, m).unwrap()
    }

    /// Every x whose shifted observations stay inside [0, 2^l).
    fn brute_force(diffs: &[i64], l: u32) -> Vec<u32> {
        (0..1u32 << l)
            .filter(|&x| diffs.iter().all(|d| (0..1i64 << l).contains(&(i64::from(x) + d))))
            .collect()
    }

    #[test]
    fn ledger_record_examples() {
        let mut ledger = DifferenceLedger::new(params(2, 2), 1);
        let l1 = BlockLabel::new(0, 1);
        assert_eq!(ledger.record(l1, DriverId(0), SignedPayload(8)).unwrap(), 2);
        assert_eq!(ledger.record(l1, DriverId(1), SignedPayload(0)).unwrap(), 0);
        assert_eq!(
            ledger.record(l1, DriverId(2), SignedPayload(6)),
            Err(AttackError::NonDivisible { label: l1, payload: 6, weight: 4 })
        );
        assert!(matches!(
            ledger.record(l1, DriverId(2), SignedPayload(16)),
            Err(AttackError::DifferenceOutOfRange { diff: 4, .. })
        ));
        assert!(matches!(
            ledger.record(BlockLabel::new(1, 0), DriverId(2), SignedPayload(0)),
            Err(AttackError::UnknownLabel(_))
        ));
        assert_eq!(ledger.differences(l1), vec![2, 0]);
        assert_eq!(ledger.drivers().len(), 2);
    }

    #[test]
    fn recover_block_examples() {
        assert_eq!(recover_block(&[-3, -2, -1, 0], 2).unwrap(), Interval { lo: 3, hi: 3 });
        assert_eq!(recover_block(&[0, 1, 2, 3], 2).unwrap(), Interval { lo: 0, hi: 0 });
        assert_eq!(brute_force(&[-1, 2], 2), vec![1]);
        assert_eq!(recover_block(&[-1, 2], 2).unwrap(), Interval { lo: 1, hi: 1 });
        assert_eq!(recover_block(&[0], 2).unwrap(), Interval { lo: 0, hi: 3 });
        assert_eq!(recover_block(&[], 2), Err(AttackError::NoObservations));
        assert!(matches!(recover_block(&[-3, 3], 2), Err(AttackError::Inconsistent(_))));
        assert!(matches!(recover_block(&[4], 2), Err(AttackError::DifferenceOutOfRange { .. })));
    }

    #[test]
    fn interval_matches_brute_force_for_all_small_multisets() {
        for l in 1..=3u32 {
            let max = (1i64 << l) - 1;
            let values: Vec<i64> = (-max..=max).collect();
            // all pairs and triples of differences, consistent or not
            for &a in &values {
                for &b in &values {
                    for &c in &values {
                        let diffs = [a, b, c];
                        let oracle = brute_force(&diffs, l);
                        match recover_block(&diffs, l) {
                            Ok(iv) => assert_eq!(oracle, (iv.lo..=iv.hi).collect::<Vec<_>>()),
                            Err(_) => assert!(oracle.is_empty()),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn single_responder_at_rider_location_reveals_nothing() {
        let p = params(2, 2);
        let mut ledger = DifferenceLedger::new(p, 2);
        for label in ledger.labels().collect::<Vec<_>>() {
            ledger.record(label, DriverId(0), SignedPayload(0)).unwrap();
        }
        let rec = recover_rider_vector(&ledger, RecoveryMode::Interval).unwrap();
        assert!(rec.vector.is_none());
        assert!(rec.candidates.blocks.values().all(|e| e.interval == Interval::full(p)));
    }

    #[test]
    fn one_bit_blocks_resolve_from_both_values() {
        for b in 0..2i64 {
            let iv = recover_block(&[-b, 1 - b], 1).unwrap();
            assert_eq!(iv, Interval { lo: b as u32, hi: b as u32 });
        }
    }

    fn ledger_for(p: BlockParams, rider: &[u64], drivers: &[Vec<u64>]) -> DifferenceLedger {
        let mut ledger = DifferenceLedger::new(p, rider.len());
        let rb = RneVector::new(rider.to_vec()).blocks(p).unwrap();
        for (k, dv) in drivers.iter().enumerate() {
            let db = RneVector::new(dv.clone()).blocks(p).unwrap();
            for i in 0..rider.len() {
                for j in 0..p.blocks() as usize {
                    let payload = codec::weighted_difference(db[i][j], rb[i][j], j, p).unwrap();
                    ledger.record(BlockLabel::new(i, j), DriverId(k as u32), payload).unwrap();
                }
            }
        }
        ledger
    }

    #[test]
    fn full_coverage_recovers_rider_and_drivers() {
        let p = params(2, 2);
        let rider = vec![9, 6];
        // four drivers whose blocks jointly cover every value per (i, j)
        let drivers: Vec<Vec<u64>> = (0..4u64).map(|q| vec![q * 5, 15 - q * 5]).collect();
        let ledger = ledger_for(p, &rider, &drivers);
        for mode in [RecoveryMode::Interval, RecoveryMode::StrictLemma] {
            let rec = recover_rider_vector(&ledger, mode).unwrap();
            assert_eq!(rec.vector, Some(RneVector::new(rider.clone())));
            let dv = recover_driver_vectors(&ledger, rec.vector.as_ref().unwrap()).unwrap();
            for (k, v) in drivers.iter().enumerate() {
                assert_eq!(dv[&DriverId(k as u32)].coords(), &v[..]);
            }
        }
    }

    #[test]
    fn strict_mode_waits_for_all_values() {
        let p = params(2, 1);
        // drivers at blocks 0 and 3 pin the rider at x = 1 without full coverage
        let ledger = ledger_for(p, &[1], &[vec![0], vec![3]]);
        let interval = recover_rider_vector(&ledger, RecoveryMode::Interval).unwrap();
        assert_eq!(interval.vector, Some(RneVector::new(vec![1])));
        let strict = recover_rider_vector(&ledger, RecoveryMode::StrictLemma).unwrap();
        assert_eq!(strict.vector, None);
        assert_eq!(strict.candidates.blocks[&BlockLabel::new(0, 0)].distinct, 2);
    }

    #[test]
    fn driver_recovery_examples() {
        let p = params(2, 1);
        let ledger = ledger_for(p, &[1], &[vec![1], vec![3]]);
        let dv = recover_driver_vectors(&ledger, &RneVector::new(vec![1])).unwrap();
        assert_eq!(dv[&DriverId(0)].coords(), &[1]);
        assert_eq!(dv[&DriverId(1)].coords(), &[3]);
        assert!(matches!(
            recover_driver_vectors(&ledger, &RneVector::new(vec![2])),
            Err(AttackError::DriverBlockOutOfRange { value: 4, .. })
        ));
        assert!(matches!(
            recover_driver_vectors(&ledger, &RneVector::new(vec![1, 1])),
            Err(AttackError::Dimension { .. })
        ));
    }

    #[test]
    fn incomplete_driver_is_rejected() {
        let p = params(2, 2);
        let mut ledger = DifferenceLedger::new(p, 1);
        ledger.record(BlockLabel::new(0, 0), DriverId(5), SignedPayload(1)).unwrap();
        assert!(matches!(
            recover_driver_vectors(&ledger, &RneVector::new(vec![0])),
            Err(AttackError::DriverObservations { count: 0, .. })
        ));
    }

    #[test]
    fn merge_requires_same_shape() {
        let mut a = ledger_for(params(2, 1), &[1], &[vec![0]]);
        let b = ledger_for(params(2, 1), &[1], &[vec![3]]);
        a.merge(&b).unwrap();
        assert_eq!(a.differences(BlockLabel::new(0, 0)), vec![-1, 2]);
        assert_eq!(a.merge(&DifferenceLedger::new(params(1, 1), 1)), Err(AttackError::ParamsMismatch));
    }

    #[test]
    fn deanonymize_rules() {
        let p = params(4, 1);
        let table = EmbeddingTable::from_vectors(
            p,
            vec![
                RneVector::new(vec![0, 4]),
                RneVector::new(vec![3, 1]),
                RneVector::new(vec![3, 1]),
                RneVector::new(vec![6, 6]),
            ],
        );
        assert_eq!(
            deanonymize(&RneVector::new(vec![0, 4]), &table).unwrap(),
            Deanonymized { node: 0, ambiguity: 1, exact: true }
        );
        assert_eq!(
            deanonymize(&RneVector::new(vec![3, 1]), &table).unwrap(),
            Deanonymized { node: 1, ambiguity: 2, exact: true }
        );
        assert_eq!(
            deanonymize(&RneVector::new(vec![5, 5]), &table).unwrap(),
            Deanonymized { node: 3, ambiguity: 1, exact: false }
        );
        let empty = EmbeddingTable::from_vectors(p, vec![]);
        assert_eq!(deanonymize(&RneVector::new(vec![0, 0]), &empty), Err(AttackError::EmptyTable));
    }

    #[test]
    fn report_tracks_when_blocks_became_unique() {
        let p = params(2, 1);
        let ledger = ledger_for(p, &[2], &[vec![2], vec![0], vec![1], vec![3], vec![0]]);
        let strict = run_attack(&ledger, RecoveryMode::StrictLemma, None).unwrap();
        assert_eq!(strict.blocks[0].unique_after, Some(4));
        assert_eq!(strict.blocks_recovered, 1);
        let interval = run_attack(&ledger, RecoveryMode::Interval, None).unwrap();
        assert_eq!(interval.blocks[0].unique_after, Some(4));
        assert_eq!(interval.rider_vector, Some(RneVector::new(vec![2])));
        assert_eq!(interval.driver_vectors.len(), 5);

        let sparse = ledger_for(p, &[2], &[vec![2]]);
        let r = run_attack(&sparse, RecoveryMode::Interval, None).unwrap();
        assert_eq!(r.blocks[0].unique_after, None);
        assert_eq!(r.blocks_recovered, 0);
        assert!(r.driver_vectors.is_empty());
    }
}
