//! Small stable hashing and mixing helpers.
//!
//! `std::hash` is not guaranteed stable across releases, so everything that
//! must stay reproducible (hashed text buckets, fallback skill vectors,
//! per-job random streams) goes through these instead.

/// FNV-1a, 64-bit.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// SplitMix64 finalizer; decorrelates nearby seeds.
pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a stream label and an index into one 64-bit seed.
pub(crate) fn mix_seed(seed: u64, stream: &str, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(fnv1a64(stream.as_bytes()) ^ splitmix64(index)))
}

/// Fractional part of `n * phi`; a low-discrepancy sequence on `[0, 1)`.
pub(crate) fn golden_fraction(n: u64) -> f64 {
    const PHI: f64 = 0.618_033_988_749_894_9;
    (n as f64 * PHI).fract()
}
