//! Executable model of an encrypted ride-matching protocol built on road
//! network embeddings, and of the passive attack by which an
//! honest-but-curious service provider recovers every party's location.
//!
//! Module map:
//!
//! - [`roadnet`]: road graphs, shortest paths and landmark embeddings.
//! - [`codec`]: block decomposition, weighted differences, payload bytes.
//! - [`crypto`]: the PRFs `H`/`F`, message encoding, key issuance.
//! - [`protocol`]: rider/driver encryption and service-provider matching.
//! - [`attack`]: difference ledger, block recovery, de-anonymization.
//! - [`harness`]: seeded experiments and line-delimited reports.

/// Hex (de)serialization and a compact `Debug` for fixed-size byte newtypes.
macro_rules! hex_bytes {
    ($name:ident, $len:expr) => {
        impl $name {
            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }
        }

        impl std::fmt::Debug for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}({})", stringify!($name), hex::encode(self.0))
            }
        }

        impl serde::Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&hex::encode(self.0))
            }
        }

        impl<'de> serde::Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = <String as serde::Deserialize>::deserialize(d)?;
                let mut out = [0u8; $len];
                hex::decode_to_slice(&s, &mut out).map_err(serde::de::Error::custom)?;
                Ok(Self(out))
            }
        }
    };
}


pub mod attack;
pub mod codec;
pub mod crypto;
pub mod harness;
pub mod protocol;
pub mod roadnet;

pub use attack::{
    deanonymize, recover_block, recover_driver_vectors, recover_rider_vector, AttackError,
    BlockCandidates, DifferenceLedger, Interval, RecoveryMode, RecoveryReport,
};
pub use codec::{
    decode_signed, decompose, encode_signed, recompose, weighted_difference, BlockParams,
    CodecError, SignedPayload,
};
pub use crypto::{
    key_manager_issue, message_encoding, prf_f, prf_h, CryptoError, Nonce, PrfOutput, SystemKeys,
};
pub use protocol::{
    driver_encrypt, rider_encrypt, sp_compute_distance, sp_match_all, sp_match_block,
    sp_select_driver, BlockDifferences, BlockLabel, DriverId, DriverResponse, ProtocolError,
    RideContext, RiderBlockGroup, RiderRequest, ServiceProvider,
};
pub use roadnet::{
    generate_grid_network, rne_distance, rne_embed, shortest_path_distance, EmbeddingTable,
    NodeId, RneVector, RoadNetwork, RoadnetError,
};
