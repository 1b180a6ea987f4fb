//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator whose seed is
//! derived from a master seed plus a `(stream, index)` counter pair. The
//! derivation runs the three words through SplitMix64 finalizers, so the
//! stream for replication `k` never depends on how many other replications
//! exist and adding runs never perturbs earlier ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream identifiers used when deriving seeds.
pub mod stream {
    pub const TRAIN: u64 = 1;
    pub const TEST: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const ARRIVALS: u64 = 10;
    pub const SERVICE: u64 = 11;
    pub const DECISIONS: u64 = 12;
    pub const AGENT: u64 = 13;
    pub const TASKS: u64 = 14;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` for the `index`-th member of `stream`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn derive_rng(master: u64, stream: u64, index: u64) -> SimRng {
    rng_from_seed(derive_seed(master, stream, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derivation_is_stable_and_separates_streams() {
        assert_eq!(derive_seed(7, 1, 0), derive_seed(7, 1, 0));
        assert_ne!(derive_seed(7, 1, 0), derive_seed(7, 1, 1));
        assert_ne!(derive_seed(7, 1, 0), derive_seed(7, 2, 0));
        assert_ne!(derive_seed(7, 1, 0), derive_seed(8, 1, 0));
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = derive_rng(42, stream::TEST, 3);
        let mut b = derive_rng(42, stream::TEST, 3);
        for _ in 0..16 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }
}
