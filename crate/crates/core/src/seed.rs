//! Deterministic seed derivation.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose
//! seed is derived from a master seed and a path of integer coordinates
//! (bootstrap pair index, cluster count, restart, ...). Work units never
//! share a stream, so results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The random stream type handed to every stochastic routine.
pub type Stream = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedSpec {
    pub master: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub const fn new(master: u64) -> Self {
        Self { master }
    }

    /// Child seed addressed by `path`. Distinct paths give unrelated seeds.
    pub fn derive(&self, path: &[u64]) -> SeedSpec {
        let mut h = splitmix64(self.master ^ 0x5EED_5EED_5EED_5EED);
        for (depth, &c) in path.iter().enumerate() {
            h = splitmix64(h ^ splitmix64(c.wrapping_add((depth as u64 + 1) << 56)));
        }
        SeedSpec { master: h }
    }

    /// Child seed addressed by a string label (scenario names and the like).
    pub fn derive_label(&self, label: &str) -> SeedSpec {
        // FNV-1a
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.derive(&[h])
    }

    pub fn stream(&self) -> Stream {
        ChaCha8Rng::seed_from_u64(self.master)
    }
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec::new(0)
    }
}

impl From<u64> for SeedSpec {
    fn from(master: u64) -> Self {
        SeedSpec::new(master)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derivation_is_stable_and_path_sensitive() {
        let s = SeedSpec::new(7);
        assert_eq!(s.derive(&[1, 2]), s.derive(&[1, 2]));
        assert_ne!(s.derive(&[1, 2]), s.derive(&[2, 1]));
        assert_ne!(s.derive(&[1]), s.derive(&[1, 0]));
        assert_ne!(s.derive(&[0]), SeedSpec::new(8).derive(&[0]));
        assert_ne!(s.derive_label("a"), s.derive_label("b"));
    }

    #[test]
    fn streams_replay() {
        let s = SeedSpec::new(42).derive(&[3]);
        let a: Vec<u64> = (0..4).map(|_| s.stream().random()).collect();
        let mut r = s.stream();
        let first: u64 = r.random();
        assert!(a.iter().all(|&x| x == first));
    }
}
