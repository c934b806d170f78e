//! Seed expansion. A master seed is split into named, indexed ChaCha streams so that
//! each component (disorder, sampling, gmc, flow) and each replica can be re-run alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a; only used to turn stream names into integers.
fn name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    pub master: u64,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        SeedStreams { master }
    }

    pub fn derive(&self, name: &str, index: u64) -> u64 {
        splitmix64(splitmix64(self.master ^ name_hash(name)) ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
    }

    pub fn stream(&self, name: &str, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derive(name, index))
    }
}

/// Uniform in (0, 1) from 52 random bits; never exactly 0 or 1.
#[inline]
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
