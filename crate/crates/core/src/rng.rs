//! Seeded random streams. Every randomized quantity in a run derives from
//! the single scenario seed through a named ChaCha stream, so traffic,
//! exploration and weight initialization can be varied independently.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substream {
    Traffic,
    Exploration,
    Init,
    Replay,
    Pretrain,
}

impl Substream {
    fn id(self) -> u64 {
        match self {
            Substream::Traffic => 1,
            Substream::Exploration => 2,
            Substream::Init => 3,
            Substream::Replay => 4,
            Substream::Pretrain => 5,
        }
    }
}

pub fn substream(seed: u64, which: Substream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}

/// Like [`substream`], with an extra index mixed in (e.g. per-agent init).
pub fn indexed_substream(seed: u64, which: Substream, index: u64) -> SimRng {
    let mixed = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .rotate_left(17);
    let mut rng = ChaCha8Rng::seed_from_u64(mixed ^ seed);
    rng.set_stream(which.id());
    rng
}
