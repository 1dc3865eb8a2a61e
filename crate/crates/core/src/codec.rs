//! Block decomposition of embedding coordinates and the signed payload
//! format carried inside ciphertexts.
//!
//! A coordinate `v < 2^(m*l)` is split little-endian into `m` blocks of `l`
//! bits, so that `v = sum_j block[j] * w_j` with `w_j = (2^l)^j`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported `m * l`; keeps every weighted difference inside an `i64`.
pub const MAX_TOTAL_BITS: u32 = 62;

/// Wire width of an encoded [`SignedPayload`].
pub const PAYLOAD_LEN: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("block width l = {0} outside 1..=8")]
    InvalidBlockBits(u32),
    #[error("block count m must be at least 1")]
    NoBlocks,
    #[error("m * l = {0} exceeds {MAX_TOTAL_BITS} bits")]
    TooWide(u32),
    #[error("value {value} does not fit in {bits} bits")]
    Capacity { value: u64, bits: u32 },
    #[error("block value {value} at index {index} is not below 2^{bits}")]
    BlockOutOfRange { index: usize, value: u64, bits: u32 },
    #[error("expected {expected} blocks, got {got}")]
    BlockCount { expected: usize, got: usize },
}

/// Block width `l` and block count `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct BlockParams {
    bits: u32,
    blocks: u32,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    l: u32,
    m: u32,
}

impl TryFrom<RawParams> for BlockParams {
    type Error = CodecError;
    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        BlockParams::new(raw.l, raw.m)
    }
}

impl From<BlockParams> for RawParams {
    fn from(p: BlockParams) -> Self {
        RawParams { l: p.bits, m: p.blocks }
    }
}

impl BlockParams {
    pub fn new(bits: u32, blocks: u32) -> Result<Self, CodecError> {
        if !(1..=8).contains(&bits) {
            return Err(CodecError::InvalidBlockBits(bits));
        }
        if blocks == 0 {
            return Err(CodecError::NoBlocks);
        }
        let total = bits * blocks;
        if total > MAX_TOTAL_BITS {
            return Err(CodecError::TooWide(total));
        }
        Ok(Self { bits, blocks })
    }

    /// Smallest block count with `2^(m*l) - 1 >= max_value`.
    pub fn covering(bits: u32, max_value: u64) -> Result<Self, CodecError> {
        let needed = (u64::BITS - max_value.leading_zeros()).max(1);
        let blocks = needed.div_ceil(bits.max(1));
        Self::new(bits, blocks)
    }

    /// `l`
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `m`
    pub fn blocks(&self) -> u32 {
        self.blocks
    }

    /// Number of distinct block values, `2^l`.
    pub fn radix(&self) -> u32 {
        1 << self.bits
    }

    pub fn max_block(&self) -> u32 {
        self.radix() - 1
    }

    pub fn total_bits(&self) -> u32 {
        self.bits * self.blocks
    }

    /// Largest representable coordinate, `2^(m*l) - 1`.
    pub fn max_value(&self) -> u64 {
        (1u64 << self.total_bits()) - 1
    }

    /// Positional weight `w_j = (2^l)^j`.
    pub fn weight(&self, j: usize) -> i64 {
        debug_assert!(j < self.blocks as usize);
        1i64 << (self.bits as usize * j)
    }
}

/// Split `value` into `m` little-endian blocks of `l` bits.
pub fn decompose(value: u64, p: BlockParams) -> Result<Vec<u32>, CodecError> {
    if value > p.max_value() {
        return Err(CodecError::Capacity {
            value,
            bits: p.total_bits(),
        });
    }
    let mask = u64::from(p.max_block());
    Ok((0..p.blocks)
        .map(|j| ((value >> (j * p.bits)) & mask) as u32)
        .collect())
}

pub fn recompose(blocks: &[u32], p: BlockParams) -> Result<u64, CodecError> {
    if blocks.len() != p.blocks as usize {
        return Err(CodecError::BlockCount {
            expected: p.blocks as usize,
            got: blocks.len(),
        });
    }
    let mut value = 0u64;
    for (j, &b) in blocks.iter().enumerate() {
        if b > p.max_block() {
            return Err(CodecError::BlockOutOfRange {
                index: j,
                value: u64::from(b),
                bits: p.bits,
            });
        }
        value |= u64::from(b) << (j as u32 * p.bits);
    }
    Ok(value)
}

/// A signed weighted block difference, `(q - block) * w_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignedPayload(pub i64);

impl SignedPayload {
    pub fn value(self) -> i64 {
        self.0
    }

    /// Two's complement, little-endian, 8 bytes.
    pub fn encode(self) -> [u8; PAYLOAD_LEN] {
        self.0.to_le_bytes()
    }

    pub fn decode(bytes: [u8; PAYLOAD_LEN]) -> Self {
        Self(i64::from_le_bytes(bytes))
    }
}

pub fn encode_signed(v: SignedPayload) -> [u8; PAYLOAD_LEN] {
    v.encode()
}

pub fn decode_signed(bytes: [u8; PAYLOAD_LEN]) -> SignedPayload {
    SignedPayload::decode(bytes)
}

/// `(q - block) * w_j`. Both `q` and `block` must be valid `l`-bit values.
pub fn weighted_difference(
    q: u32,
    block: u32,
    j: usize,
    p: BlockParams,
) -> Result<SignedPayload, CodecError> {
    for (index, v) in [q, block].into_iter().enumerate() {
        if v > p.max_block() {
            return Err(CodecError::BlockOutOfRange {
                index,
                value: u64::from(v),
                bits: p.bits,
            });
        }
    }
    if j >= p.blocks as usize {
        return Err(CodecError::BlockCount {
            expected: p.blocks as usize,
            got: j + 1,
        });
    }
    Ok(SignedPayload(
        (i64::from(q) - i64::from(block)) * p.weight(j),
    ))
}
