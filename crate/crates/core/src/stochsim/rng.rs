//! Per-path random streams.
//!
//! Every path owns a ChaCha8 stream keyed by the master seed with the path
//! index as the stream id. ChaCha is a counter-based generator, so the draws
//! of path `k` depend only on `(seed, k)` and never on how many paths ran
//! before it or on which thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

pub fn path_rng(master_seed: u64, path_index: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    rng
}
