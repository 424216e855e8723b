//! Reproducible, splittable random streams.
//!
//! Every source of randomness in the crate is a [`RngStream`]: a ChaCha
//! counter-based generator addressed by `(seed, stream id)`. Identical seeds
//! yield bit-identical variate sequences, and distinct stream ids give
//! statistically independent streams from one master seed, so each chain,
//! replicate or pipeline stage owns its own stream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Well-known stream domains; combined with an index they address substreams
/// of a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    Simulation,
    Chain,
    ParamDraws,
    Test,
}

impl StreamKind {
    fn tag(self) -> u64 {
        match self {
            StreamKind::Simulation => 1,
            StreamKind::Chain => 2,
            StreamKind::ParamDraws => 3,
            StreamKind::Test => 4,
        }
    }
}

/// A counter-based random stream derived from `(seed, stream id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha20Rng,
}

impl RngStream {
    /// Stream 0 of the given seed.
    pub fn new(seed: u64) -> Self {
        RngStream {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Substream `(kind, index)` of the given master seed.
    pub fn substream(seed: u64, kind: StreamKind, index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream((kind.tag() << 48) ^ index);
        RngStream { rng }
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        rand::Rng::gen::<f64>(&mut self.rng)
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        rand::Rng::gen_range(&mut self.rng, 0..bound)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}
