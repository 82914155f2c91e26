//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator whose 256-bit seed
//! is the SHA-256 digest of a master seed and a list of integer keys. A stream
//! therefore depends only on `(master_seed, keys)`, never on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

const DOMAIN: &[u8] = b"regperc/stream/v1";

/// Builds the stream for `(master_seed, keys...)`.
pub fn derive_rng(master_seed: u64, keys: &[u64]) -> SimRng {
    SimRng::from_seed(derive_seed(master_seed, keys))
}

pub fn derive_seed(master_seed: u64, keys: &[u64]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(DOMAIN);
    h.update(master_seed.to_le_bytes());
    h.update((keys.len() as u64).to_le_bytes());
    for k in keys {
        h.update(k.to_le_bytes());
    }
    h.finalize().into()
}

/// Folds a derived seed down to 64 bits, for reporting in CSV rows.
pub fn derive_u64(master_seed: u64, keys: &[u64]) -> u64 {
    let s = derive_seed(master_seed, keys);
    u64::from_le_bytes(s[..8].try_into().unwrap())
}

/// A plain seeded stream, for single-shot CLI commands.
pub fn seeded(seed: u64) -> SimRng {
    derive_rng(seed, &[])
}
