//! The two PRFs `H` and `F`, key issuance and nonces.
//!
//! Both PRFs are HMAC-SHA256 truncated to 128 bits. `H` is keyed by a 32-byte
//! system key; `F` is keyed by a 16-byte `H` output and applied to a nonce.

use std::fmt;

use hmac::{Hmac, Mac};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::Sha256;
use thiserror::Error;

pub mod watchdog;

/// Construction name recorded in experiment reports.
pub const PRF_CONSTRUCTION: &str = "HMAC-SHA256";
/// Truncated PRF output width in bits.
pub const PRF_OUTPUT_BITS: u32 = 128;
pub const PRF_LEN: usize = 16;
pub const KEY_LEN: usize = 32;
pub const NONCE_LEN: usize = 16;
/// Length of the encoded `q||i||j||z||s` message.
pub const MESSAGE_LEN: usize = 13;

type HmacSha256 = Hmac<Sha256>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("message field `{field}` value {value} does not fit in {bytes} byte(s)")]
    FieldOverflow {
        field: &'static str,
        value: u64,
        bytes: usize,
    },
}

/// A 128-bit PRF value. Used both as a derived key for `F` and as a mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrfOutput(pub [u8; PRF_LEN]);
hex_bytes!(PrfOutput, PRF_LEN);

impl PrfOutput {
    /// First 8 bytes, the XOR mask for a payload.
    pub fn mask(&self) -> [u8; 8] {
        let mut m = [0u8; 8];
        m.copy_from_slice(&self.0[..8]);
        m
    }
}

/// Per-(i, j) rider nonce `gamma`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Nonce(pub [u8; NONCE_LEN]);
hex_bytes!(Nonce, NONCE_LEN);

impl Nonce {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; NONCE_LEN];
        rng.fill_bytes(&mut b);
        Self(b)
    }
}

/// HMAC-SHA256 truncated to 128 bits.
pub fn hmac_sha256_128(key: &[u8], message: &[u8]) -> PrfOutput {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts keys of any length");
    mac.update(message);
    let full = mac.finalize().into_bytes();
    let mut out = [0u8; PRF_LEN];
    out.copy_from_slice(&full[..PRF_LEN]);
    let out = PrfOutput(out);
    watchdog::observe(key, message, &out);
    out
}

/// `H(key, message)`.
pub fn prf_h(key: &[u8; KEY_LEN], message: &[u8]) -> PrfOutput {
    hmac_sha256_128(key, message)
}

/// `F(derived_key, nonce)`.
pub fn prf_f(derived_key: &PrfOutput, nonce: &Nonce) -> PrfOutput {
    hmac_sha256_128(&derived_key.0, &nonce.0)
}

/// Fixed-width big-endian `q||i||j||z||s`: 1 + 2 + 2 + 4 + 4 bytes.
pub fn message_encoding(
    q: u32,
    i: usize,
    j: usize,
    zone: u32,
    slot: u32,
) -> Result<[u8; MESSAGE_LEN], CryptoError> {
    let q = u8::try_from(q).map_err(|_| CryptoError::FieldOverflow {
        field: "q",
        value: u64::from(q),
        bytes: 1,
    })?;
    let narrow = |field, v: usize| {
        u16::try_from(v).map_err(|_| CryptoError::FieldOverflow {
            field,
            value: v as u64,
            bytes: 2,
        })
    };
    let i = narrow("i", i)?;
    let j = narrow("j", j)?;

    let mut out = [0u8; MESSAGE_LEN];
    out[0] = q;
    out[1..3].copy_from_slice(&i.to_be_bytes());
    out[3..5].copy_from_slice(&j.to_be_bytes());
    out[5..9].copy_from_slice(&zone.to_be_bytes());
    out[9..13].copy_from_slice(&slot.to_be_bytes());
    Ok(out)
}

/// The shared rider/driver secrets `kappa1`, `kappa2`.
///
/// Only the key manager constructs these. Service-provider code never
/// receives a `SystemKeys` value.
#[derive(Clone, PartialEq, Eq)]
pub struct SystemKeys {
    kappa1: [u8; KEY_LEN],
    kappa2: [u8; KEY_LEN],
}

impl fmt::Debug for SystemKeys {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SystemKeys(..)")
    }
}

impl SystemKeys {
    pub fn kappa1(&self) -> &[u8; KEY_LEN] {
        &self.kappa1
    }

    pub fn kappa2(&self) -> &[u8; KEY_LEN] {
        &self.kappa2
    }
}

/// One-shot key issuance by the trusted key manager. Deterministic in `seed`.
pub fn key_manager_issue(seed: u64) -> SystemKeys {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let kappa1: [u8; KEY_LEN] = rng.gen();
    let mut kappa2: [u8; KEY_LEN] = rng.gen();
    while kappa2 == kappa1 {
        kappa2 = rng.gen();
    }
    SystemKeys { kappa1, kappa2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn rfc4231_vectors_truncated() {
        // RFC 4231 test case 1
        let out = hmac_sha256_128(&[0x0b; 20], b"Hi There");
        assert_eq!(hex::encode(out.0), "b0344c61d8db38535ca8afceaf0bf12b");
        // test case 2
        let out = hmac_sha256_128(b"Jefe", b"what do ya want for nothing?");
        assert_eq!(hex::encode(out.0), "5bdcc146bf60754e6a042426089575c7");
        // test case 5 is itself specified as a 128-bit truncation
        let out = hmac_sha256_128(&[0x0c; 20], b"Test With Truncation");
        assert_eq!(hex::encode(out.0), "a3b6167473100ee06e0c796c2955552b");
    }

    #[test]
    fn prf_h_is_deterministic_and_sensitive() {
        let keys = key_manager_issue(3);
        let m1 = message_encoding(1, 2, 3, 4, 5).unwrap();
        assert_eq!(prf_h(keys.kappa1(), &m1), prf_h(keys.kappa1(), &m1));

        let mut seen = HashSet::new();
        for pos in 0..MESSAGE_LEN {
            for bit in 0..8 {
                let mut m2 = m1;
                m2[pos] ^= 1 << bit;
                assert!(seen.insert(prf_h(keys.kappa1(), &m2)));
            }
        }
        assert!(!seen.contains(&prf_h(keys.kappa1(), &m1)));
        assert_ne!(prf_h(keys.kappa1(), &m1), prf_h(keys.kappa2(), &m1));
    }

    #[test]
    fn prf_f_distinct_nonces() {
        let keys = key_manager_issue(9);
        let derived = prf_h(keys.kappa1(), &message_encoding(0, 0, 0, 0, 0).unwrap());
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut seen = HashSet::new();
        for _ in 0..10_000 {
            let nonce = Nonce::random(&mut rng);
            assert_eq!(prf_f(&derived, &nonce), prf_f(&derived, &nonce));
            assert!(seen.insert(prf_f(&derived, &nonce)));
        }
    }

    #[test]
    fn f_equality_follows_h_equality() {
        let keys = key_manager_issue(5);
        let nonce = Nonce([7; NONCE_LEN]);
        let h = |q| prf_h(keys.kappa1(), &message_encoding(q, 1, 1, 9, 9).unwrap());
        assert_eq!(prf_f(&h(2), &nonce), prf_f(&h(2), &nonce));
        assert_ne!(prf_f(&h(2), &nonce), prf_f(&h(3), &nonce));
    }

    #[test]
    fn message_encoding_examples() {
        assert_eq!(message_encoding(0, 0, 0, 0, 0).unwrap(), [0u8; 13]);
        assert_eq!(
            hex::encode(message_encoding(3, 1, 2, 7, 9).unwrap()),
            "03000100020000000700000009"
        );
        assert!(matches!(
            message_encoding(256, 0, 0, 0, 0),
            Err(CryptoError::FieldOverflow { field: "q", .. })
        ));
        assert!(matches!(
            message_encoding(0, 70_000, 0, 0, 0),
            Err(CryptoError::FieldOverflow { field: "i", .. })
        ));
        assert!(matches!(
            message_encoding(0, 0, 65_536, 0, 0),
            Err(CryptoError::FieldOverflow { field: "j", .. })
        ));
    }

    #[test]
    fn message_encoding_injective_on_small_ranges() {
        let mut seen = HashSet::new();
        for q in [0, 1, 15, 255] {
            for i in [0, 1, 7, 256] {
                for j in [0, 1, 3, 512] {
                    for z in [0, 1, u32::MAX] {
                        for s in [0, 2, 1 << 24] {
                            assert!(seen.insert(message_encoding(q, i, j, z, s).unwrap()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn key_issuance() {
        assert_eq!(key_manager_issue(1), key_manager_issue(1));
        let keys: HashSet<[u8; KEY_LEN]> = (0..100).map(|s| *key_manager_issue(s).kappa1()).collect();
        assert_eq!(keys.len(), 100);
        let k = key_manager_issue(42);
        assert_ne!(k.kappa1(), k.kappa2());
        assert_eq!(format!("{k:?}"), "SystemKeys(..)");
    }

    #[test]
    fn hex_serde() {
        let out = PrfOutput([0xab; 16]);
        let s = serde_json::to_string(&out).unwrap();
        assert_eq!(s, format!("\"{}\"", "ab".repeat(16)));
        assert_eq!(serde_json::from_str::<PrfOutput>(&s).unwrap(), out);
        assert!(serde_json::from_str::<Nonce>("\"abcd\"").is_err());
    }
}
