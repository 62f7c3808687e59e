//! Counter-based random substreams.
//!
//! Every trial of every experiment draws from its own ChaCha8 stream,
//! addressed by `(master_seed, stream_index)`, so results do not depend on
//! how trials are scheduled across worker threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Address of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Stream for trial `index` of the experiment named `tag`.
    pub fn for_experiment(master_seed: u64, tag: &str, index: u64) -> Self {
        Self::new(mix(master_seed ^ fnv1a(tag.as_bytes())), index)
    }

    /// Derives a child stream, e.g. one per inner Monte Carlo trial.
    pub fn child(&self, index: u64) -> Self {
        Self::new(
            mix(self.master_seed ^ mix(self.stream_index.wrapping_add(0x9e37_79b9))),
            index,
        )
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
