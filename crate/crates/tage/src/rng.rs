//! Deterministic random streams.
//!
//! Every stochastic draw in a run derives from one 64-bit root seed. Streams
//! are split by mixing the root with purpose tags and indices, so independent
//! units of work (traces, offspring slots, generations) own private
//! generators and parallel scheduling cannot perturb results.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

/// The generator used throughout; PCG streams are portable and stable.
pub type Rng = Pcg64Mcg;

/// A derivable seed. `child(i)` splits off statistically independent
/// sub-seeds; `rng()` materializes a generator.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct StreamSeed(u64);

impl StreamSeed {
    pub fn new(root: u64) -> StreamSeed {
        StreamSeed(splitmix64(root ^ 0x6A09_E667_F3BC_C908))
    }

    pub fn child(self, index: u64) -> StreamSeed {
        StreamSeed(splitmix64(self.0 ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
    }

    pub fn rng(self) -> Rng {
        Pcg64Mcg::seed_from_u64(self.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
