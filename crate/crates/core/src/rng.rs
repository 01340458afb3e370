//! Reproducible stream derivation for parallel Monte Carlo.
//!
//! Every replicate draws from a child stream derived from (master seed,
//! replicate index) by a counter-based mix, so results do not depend on
//! thread count or scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A point in the stream tree. Cheap to copy; children are derived by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    seed: u64,
    path: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream { seed, path: 0 }
    }

    /// Child stream for index `i` (replicate, restart, grid point, ...).
    #[must_use]
    pub fn child(self, i: u64) -> Self {
        Stream {
            seed: self.seed,
            path: splitmix(self.path ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.path);
        rng
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
