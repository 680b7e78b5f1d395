//! Seeded, serializable random generator shared by the simulator, episode
//! sampling and the random policy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Purpose tags mixed into episode seeds. Distinct tags give disjoint seed
/// keys, so evaluation episodes can never coincide with training episodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedNamespace {
    Train,
    Eval,
    Dataset,
}

impl SeedNamespace {
    fn tag(self) -> u64 {
        match self {
            SeedNamespace::Train => 0x7472_6169_6e00_0001,
            SeedNamespace::Eval => 0x6576_616c_0000_0002,
            SeedNamespace::Dataset => 0x6461_7461_0000_0003,
        }
    }
}

/// Stream ids inside one episode key.
pub(crate) const WORLD_STREAM: u64 = 0;
pub(crate) const POLICY_STREAM: u64 = 1;

/// Builds the 256-bit generator key for an episode. The map from
/// `(config_seed, namespace, a, b)` to keys is injective.
pub fn episode_key(config_seed: u64, namespace: SeedNamespace, a: u64, b: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    for (chunk, word) in key
        .chunks_exact_mut(8)
        .zip([config_seed, namespace.tag(), a, b])
    {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    key
}

/// Deterministic generator. Its full state serializes, so a snapshot of a
/// world resumes with the exact same random draws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimRng(ChaCha8Rng);

impl SimRng {
    pub fn from_key(key: [u8; 32], stream: u64) -> Self {
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        SimRng(inner)
    }

    pub fn seed_from_u64(seed: u64) -> Self {
        SimRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform draw on `[lo, hi)`; returns `lo` when the interval is empty.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi > lo {
            self.0.random_range(lo..hi)
        } else {
            lo
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.random()
    }
}
