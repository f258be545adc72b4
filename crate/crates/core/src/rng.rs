use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Seed plus stream index for a ChaCha generator.
///
/// ChaCha streams are independent for distinct `stream` values under the same
/// key, so replica `r` of an experiment draws from stream `r` and the result
/// does not depend on the order in which replicas are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub const fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub const fn with_stream(self, stream: u64) -> Self {
        Self {
            seed: self.seed,
            stream,
        }
    }

    /// Derive a seed for a sub-experiment so that its streams never collide
    /// with those of the parent.
    pub fn derive(self, tag: u64) -> Self {
        // splitmix64 finalizer
        let mut z = self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Self {
            seed: z ^ (z >> 31),
            stream: self.stream,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

impl Default for RngSeed {
    fn default() -> Self {
        Self::new(0x5EED)
    }
}
