//! Named random streams.
//!
//! Every source of randomness is derived from one base seed plus a stream
//! tag, so that turning a feature off (for example the contrastive term)
//! never shifts the numbers another feature draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent random streams derived from a base seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Parameter initialization.
    Init,
    /// Per-epoch shuffling of training triples.
    Shuffle,
    /// Negative triple corruption.
    Corruption,
    /// Contrastive example generation.
    Contrastive,
    /// Edge dropout in the GNN.
    Dropout,
    /// Enclosing/bridging mixing for evaluation sets.
    Mixing,
    /// Synthetic data generation.
    Synthetic,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Init => 1,
            Stream::Shuffle => 2,
            Stream::Corruption => 3,
            Stream::Contrastive => 4,
            Stream::Dropout => 5,
            Stream::Mixing => 6,
            Stream::Synthetic => 7,
        }
    }
}

/// Opens stream `stream` for `seed`.
pub fn stream(seed: u64, stream: Stream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.tag());
    rng
}

/// Opens a sub-stream keyed by extra coordinates (epoch, triple index, ...).
pub fn substream(seed: u64, s: Stream, coords: &[u64]) -> StreamRng {
    let mut key = mix(seed ^ s.tag().wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for &c in coords {
        key = mix(key ^ c.wrapping_add(0x632b_e59b_d9b4_e019));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(s.tag());
    rng
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
