//! The honest protocol: rider request, driver response, and the service
//! provider's matching, distance computation and driver selection.
//!
//! For every coordinate `i` and block `j` the rider publishes a nonce and
//! `2^l` entries, one per candidate value `q`:
//!
//! ```text
//! c1 = F(H(k1, q||i||j||z||s), gamma)
//! c2 = F(H(k2, q||i||j||z||s), gamma)[..8] xor encode((q - block) * w_j)
//! ```
//!
//! A driver publishes `H(k1, b||i||j||z||s)` and `H(k2, b||i||j||z||s)` for
//! its own block `b`. The service provider finds the rider entry whose `c1`
//! equals `F(c1', gamma)` and unmasks that entry's `c2` with `F(c2', gamma)`,
//! learning `(b - block) * w_j`.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{self, BlockParams, CodecError, SignedPayload, PAYLOAD_LEN};
use crate::crypto::{self, CryptoError, Nonce, PrfOutput, SystemKeys};
use crate::roadnet::RneVector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("location has dimension {got}, session expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("request and response belong to different sessions")]
    ContextMismatch,
    #[error("rider group {label} has {got} entries, expected {expected}")]
    MalformedGroup {
        label: BlockLabel,
        expected: usize,
        got: usize,
    },
    #[error("label {0} appears more than once")]
    DuplicateLabel(BlockLabel),
    #[error("label {0} is outside the session dimensions")]
    UnknownLabel(BlockLabel),
    #[error("{got} entries, expected {expected}")]
    EntryCount { expected: usize, got: usize },
    #[error("PRF collision: {matches} rider entries of {label} match one driver ciphertext")]
    PrfCollision { label: BlockLabel, matches: usize },
    #[error("driver ciphertext for {label} matches no rider entry")]
    Unmatched { label: BlockLabel },
    #[error("no block difference for {0}")]
    Incomplete(BlockLabel),
    #[error("no driver responded")]
    NoResponses,
}

/// Session parameters every party in one matching round shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RideContext {
    pub zone: u32,
    pub slot: u32,
    pub params: BlockParams,
    /// Embedding dimension `n`.
    pub dim: usize,
}

impl RideContext {
    pub fn new(zone: u32, slot: u32, params: BlockParams, dim: usize) -> Self {
        Self {
            zone,
            slot,
            params,
            dim,
        }
    }

    /// `n * m`
    pub fn block_count(&self) -> usize {
        self.dim * self.params.blocks() as usize
    }

    pub fn labels(&self) -> impl Iterator<Item = BlockLabel> {
        let blocks = self.params.blocks() as usize;
        (0..self.dim).flat_map(move |i| (0..blocks).map(move |j| BlockLabel::new(i, j)))
    }

    fn contains(&self, label: BlockLabel) -> bool {
        label.coord() < self.dim && label.block() < self.params.blocks() as usize
    }

    fn message(&self, value: u32, label: BlockLabel) -> Result<[u8; crypto::MESSAGE_LEN], CryptoError> {
        crypto::message_encoding(value, label.coord(), label.block(), self.zone, self.slot)
    }
}

/// Clear `(i, j)` group label carried on rider groups and driver entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockLabel {
    pub i: u16,
    pub j: u16,
}

impl BlockLabel {
    pub fn new(i: usize, j: usize) -> Self {
        Self {
            i: i as u16,
            j: j as u16,
        }
    }

    pub fn coord(&self) -> usize {
        usize::from(self.i)
    }

    pub fn block(&self) -> usize {
        usize::from(self.j)
    }
}

impl std::fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(i={}, j={})", self.i, self.j)
    }
}

/// Payload bytes XOR-ed with the first 8 bytes of a PRF output.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MaskedPayload(pub [u8; PAYLOAD_LEN]);
hex_bytes!(MaskedPayload, PAYLOAD_LEN);

impl MaskedPayload {
    fn seal(payload: SignedPayload, mask: [u8; 8]) -> Self {
        Self(xor8(payload.encode(), mask))
    }

    fn open(&self, mask: [u8; 8]) -> SignedPayload {
        SignedPayload::decode(xor8(self.0, mask))
    }
}

fn xor8(a: [u8; 8], b: [u8; 8]) -> [u8; 8] {
    std::array::from_fn(|k| a[k] ^ b[k])
}

/// One rider ciphertext for a single candidate `q`. `tag` equals `c1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiderEntry {
    pub tag: PrfOutput,
    pub c1: PrfOutput,
    pub c2: MaskedPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiderBlockGroup {
    pub label: BlockLabel,
    pub nonce: Nonce,
    /// `2^l` entries in random order over `q`.
    pub entries: Vec<RiderEntry>,
}

impl RiderBlockGroup {
    /// Indices of entries satisfying `c1 == F(c1', gamma)`.
    pub fn matching_entries(&self, c1p: &PrfOutput) -> Vec<usize> {
        let probe = crypto::prf_f(c1p, &self.nonce);
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.c1 == probe)
            .map(|(k, _)| k)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiderRequest {
    pub context: RideContext,
    pub groups: Vec<RiderBlockGroup>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DriverId(pub u32);

impl std::fmt::Display for DriverId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "driver-{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriverEntry {
    pub label: BlockLabel,
    pub c1p: PrfOutput,
    pub c2p: PrfOutput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriverResponse {
    pub driver: DriverId,
    pub context: RideContext,
    pub entries: Vec<DriverEntry>,
}

fn checked_blocks(location: &RneVector, ctx: &RideContext) -> Result<Vec<Vec<u32>>, ProtocolError> {
    if location.dimension() != ctx.dim {
        return Err(ProtocolError::DimensionMismatch {
            expected: ctx.dim,
            got: location.dimension(),
        });
    }
    Ok(location.blocks(ctx.params)?)
}

/// Build the rider's ride request: a fresh nonce and `2^l` entries per block.
pub fn rider_encrypt<R: RngCore + ?Sized>(
    location: &RneVector,
    keys: &SystemKeys,
    ctx: &RideContext,
    rng: &mut R,
) -> Result<RiderRequest, ProtocolError> {
    let blocks = checked_blocks(location, ctx)?;
    let mut groups = Vec::with_capacity(ctx.block_count());
    for label in ctx.labels() {
        let block = blocks[label.coord()][label.block()];
        let nonce = Nonce::random(rng);
        let mut entries = Vec::with_capacity(ctx.params.radix() as usize);
        for q in 0..ctx.params.radix() {
            let msg = ctx.message(q, label)?;
            let c1 = crypto::prf_f(&crypto::prf_h(keys.kappa1(), &msg), &nonce);
            let mask = crypto::prf_f(&crypto::prf_h(keys.kappa2(), &msg), &nonce).mask();
            let payload = codec::weighted_difference(q, block, label.block(), ctx.params)?;
            entries.push(RiderEntry {
                tag: c1,
                c1,
                c2: MaskedPayload::seal(payload, mask),
            });
        }
        entries.shuffle(rng);
        groups.push(RiderBlockGroup {
            label,
            nonce,
            entries,
        });
    }
    groups.shuffle(rng);
    Ok(RiderRequest {
        context: *ctx,
        groups,
    })
}

/// Build a driver's response: one `(c1', c2')` pair per block.
pub fn driver_encrypt<R: RngCore + ?Sized>(
    driver: DriverId,
    location: &RneVector,
    keys: &SystemKeys,
    ctx: &RideContext,
    rng: &mut R,
) -> Result<DriverResponse, ProtocolError> {
    let blocks = checked_blocks(location, ctx)?;
    let mut entries = Vec::with_capacity(ctx.block_count());
    for label in ctx.labels() {
        let msg = ctx.message(blocks[label.coord()][label.block()], label)?;
        entries.push(DriverEntry {
            label,
            c1p: crypto::prf_h(keys.kappa1(), &msg),
            c2p: crypto::prf_h(keys.kappa2(), &msg),
        });
    }
    entries.shuffle(rng);
    Ok(DriverResponse {
        driver,
        context: *ctx,
        entries,
    })
}

/// Match one driver pair against one rider group.
///
/// `Ok(None)` means no entry matched, i.e. the pair belongs to another block.
pub fn sp_match_block(
    group: &RiderBlockGroup,
    c1p: &PrfOutput,
    c2p: &PrfOutput,
) -> Result<Option<SignedPayload>, ProtocolError> {
    let hits = group.matching_entries(c1p);
    match hits[..] {
        [] => Ok(None),
        [k] => {
            let mask = crypto::prf_f(c2p, &group.nonce).mask();
            Ok(Some(group.entries[k].c2.open(mask)))
        }
        _ => Err(ProtocolError::PrfCollision {
            label: group.label,
            matches: hits.len(),
        }),
    }
}

/// Weighted block differences `(b_driver - b_rider) * w_j` for one driver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDifferences {
    pub dim: usize,
    pub blocks: usize,
    pub diffs: BTreeMap<BlockLabel, SignedPayload>,
}

impl BlockDifferences {
    pub fn get(&self, label: BlockLabel) -> Option<SignedPayload> {
        self.diffs.get(&label).copied()
    }

    pub fn is_complete(&self) -> bool {
        (0..self.dim).all(|i| (0..self.blocks).all(|j| self.diffs.contains_key(&BlockLabel::new(i, j))))
    }
}

fn index_groups(request: &RiderRequest) -> Result<HashMap<BlockLabel, &RiderBlockGroup>, ProtocolError> {
    let ctx = &request.context;
    if request.groups.len() != ctx.block_count() {
        return Err(ProtocolError::EntryCount {
            expected: ctx.block_count(),
            got: request.groups.len(),
        });
    }
    let radix = ctx.params.radix() as usize;
    let mut index = HashMap::with_capacity(request.groups.len());
    for group in &request.groups {
        if !ctx.contains(group.label) {
            return Err(ProtocolError::UnknownLabel(group.label));
        }
        if group.entries.len() != radix {
            return Err(ProtocolError::MalformedGroup {
                label: group.label,
                expected: radix,
                got: group.entries.len(),
            });
        }
        if index.insert(group.label, group).is_some() {
            return Err(ProtocolError::DuplicateLabel(group.label));
        }
    }
    Ok(index)
}

/// Match every driver pair to its rider group and unmask all differences.
pub fn sp_match_all(
    request: &RiderRequest,
    response: &DriverResponse,
) -> Result<BlockDifferences, ProtocolError> {
    if request.context != response.context {
        return Err(ProtocolError::ContextMismatch);
    }
    let ctx = &request.context;
    let index = index_groups(request)?;
    if response.entries.len() != ctx.block_count() {
        return Err(ProtocolError::EntryCount {
            expected: ctx.block_count(),
            got: response.entries.len(),
        });
    }
    let mut diffs = BTreeMap::new();
    for entry in &response.entries {
        let group = index
            .get(&entry.label)
            .ok_or(ProtocolError::UnknownLabel(entry.label))?;
        let payload = sp_match_block(group, &entry.c1p, &entry.c2p)?
            .ok_or(ProtocolError::Unmatched { label: entry.label })?;
        if diffs.insert(entry.label, payload).is_some() {
            return Err(ProtocolError::DuplicateLabel(entry.label));
        }
    }
    Ok(BlockDifferences {
        dim: ctx.dim,
        blocks: ctx.params.blocks() as usize,
        diffs,
    })
}

/// `max_i |sum_j diff(i, j)|`
pub fn sp_compute_distance(diffs: &BlockDifferences) -> Result<u64, ProtocolError> {
    let mut best = 0u64;
    for i in 0..diffs.dim {
        let mut sum = 0i64;
        for j in 0..diffs.blocks {
            let label = BlockLabel::new(i, j);
            sum += diffs.get(label).ok_or(ProtocolError::Incomplete(label))?.value();
        }
        best = best.max(sum.unsigned_abs());
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub driver: DriverId,
    pub distance: u64,
}

/// Driver at minimum embedded distance; ties go to the lowest driver id.
pub fn sp_select_driver(
    request: &RiderRequest,
    responses: &[DriverResponse],
) -> Result<Selection, ProtocolError> {
    let mut best: Option<Selection> = None;
    for response in responses {
        let distance = sp_compute_distance(&sp_match_all(request, response)?)?;
        let candidate = Selection {
            driver: response.driver,
            distance,
        };
        if best.is_none_or(|b| (distance, response.driver) < (b.distance, b.driver)) {
            best = Some(candidate);
        }
    }
    best.ok_or(ProtocolError::NoResponses)
}

/// Everything the service provider learns from one ride request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub context: RideContext,
    pub selection: Selection,
    /// Per responding driver, in response order.
    pub differences: Vec<(DriverId, BlockDifferences)>,
}

/// The matching party. It holds no key material: its inputs are ciphertexts,
/// nonces and clear `(i, j)` labels only.
#[derive(Debug, Default)]
pub struct ServiceProvider {
    transcripts: Vec<SessionTranscript>,
}

impl ServiceProvider {
    pub fn new() -> Self {
        Self::default()
    }

    /// Run matching for one ride request and keep the transcript.
    pub fn handle_request(
        &mut self,
        request: &RiderRequest,
        responses: &[DriverResponse],
    ) -> Result<&SessionTranscript, ProtocolError> {
        if responses.is_empty() {
            return Err(ProtocolError::NoResponses);
        }
        let mut differences = Vec::with_capacity(responses.len());
        let mut best: Option<Selection> = None;
        for response in responses {
            let diffs = sp_match_all(request, response)?;
            let distance = sp_compute_distance(&diffs)?;
            if best.is_none_or(|b| (distance, response.driver) < (b.distance, b.driver)) {
                best = Some(Selection {
                    driver: response.driver,
                    distance,
                });
            }
            differences.push((response.driver, diffs));
        }
        self.transcripts.push(SessionTranscript {
            context: request.context,
            selection: best.expect("at least one response"),
            differences,
        });
        Ok(self.transcripts.last().expect("just pushed"))
    }

    pub fn transcripts(&self) -> &[SessionTranscript] {
        &self.transcripts
    }
}

/// Line-delimited JSON records for logging and replay.
pub mod wire {
    use super::{DriverResponse, RiderRequest};
    use serde::{Deserialize, Serialize};

    pub const SCHEMA: &str = "ridematch.message/v1";

    #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(tag = "record", rename_all = "snake_case")]
    pub enum Message {
        RiderRequest {
            schema: String,
            #[serde(flatten)]
            request: RiderRequest,
        },
        DriverResponse {
            schema: String,
            #[serde(flatten)]
            response: DriverResponse,
        },
    }

    impl Message {
        pub fn request(request: RiderRequest) -> Self {
            Self::RiderRequest {
                schema: SCHEMA.into(),
                request,
            }
        }

        pub fn response(response: DriverResponse) -> Self {
            Self::DriverResponse {
                schema: SCHEMA.into(),
                response,
            }
        }

        pub fn to_line(&self) -> String {
            serde_json::to_string(self).expect("messages serialize")
        }

        pub fn from_line(line: &str) -> serde_json::Result<Self> {
            serde_json::from_str(line)
        }
    }
}
