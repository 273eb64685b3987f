//! Reproducible, splittable random streams.
//!
//! A stream is a ChaCha key derived from the base seed plus a 64-bit stream
//! id derived from a tuple of labels. Any replication can be regenerated in
//! isolation from `(seed, labels)` alone, independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a label tuple.
pub fn hash_labels(labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(0x51_7cc1_b727_220a_u64, |h, &x| mix64(h ^ mix64(x)))
}

/// Stream for `labels` under `seed`.
pub fn stream(seed: u64, labels: &[u64]) -> StreamRng {
    let mut rng = StreamRng::seed_from_u64(mix64(seed));
    rng.set_stream(hash_labels(labels));
    rng
}
