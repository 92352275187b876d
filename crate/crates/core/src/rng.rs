//! Deterministic random streams.
//!
//! Every consumer of randomness draws from its own ChaCha stream derived from
//! `(master_seed, stream id)`, so adding or removing one consumer never shifts
//! the numbers seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Well-known stream ids used by the training drivers.
pub mod stream {
    pub const PRIMAL_INIT: u64 = 1;
    pub const ADJOINT_INIT: u64 = 2;
    pub const PRIMAL_POINTS: u64 = 3;
    pub const ADJOINT_POINTS: u64 = 4;
    pub const FUNCTIONAL_POINTS: u64 = 5;
    pub const ESTIMATOR_POINTS: u64 = 6;
    /// Resampling / refinement events use `EVENT_BASE + event counter`.
    pub const EVENT_BASE: u64 = 1000;
}

pub fn substream(master_seed: u64, stream_id: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}
