//! Seed lineage. Every random stream is a ChaCha8 generator keyed by a
//! hash of `(global seed, stream tag, indices...)`, so results never depend
//! on scheduling order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

/// Distinct purposes drawing from the same global seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Schedule = 0x5c4e_d01e,
    Pairing = 0x9a1f_0c2d,
    Sample = 0x5a3b_1e00,
    Corruption = 0xc0_4407,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a seed, a stream tag and indices into one 64-bit key.
pub fn derive_seed(seed: u64, stream: Stream, indices: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ splitmix64(stream as u64));
    for &i in indices {
        h = splitmix64(h ^ splitmix64(i.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

pub fn stream_rng(seed: u64, stream: Stream, indices: &[u64]) -> SampleRng {
    from_key(derive_seed(seed, stream, indices))
}

/// Generator for a key already produced by [`derive_seed`].
pub fn from_key(key: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(key)
}

/// Generator for one sample of one epoch.
pub fn sample_rng(seed: u64, epoch: u64, sample_index: u64) -> SampleRng {
    stream_rng(seed, Stream::Sample, &[epoch, sample_index])
}

/// Generator shared by every sample of an epoch (random-curriculum draws).
pub fn schedule_rng(seed: u64, epoch: u64) -> SampleRng {
    stream_rng(seed, Stream::Schedule, &[epoch])
}
