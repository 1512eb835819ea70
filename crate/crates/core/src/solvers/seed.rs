//! Deterministic seed derivation.
//!
//! Every stochastic component in this crate draws from a ChaCha8 stream
//! keyed by a value derived here, so results depend only on the master seed
//! and the logical position of the consumer (shot index, trial index, ...),
//! never on scheduling or thread count.

/// SplitMix64-style mix of a seed and an index. The derived value for
/// `index` is independent of how many other indices were derived.
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a path of indices into a master seed: `derive(s, &[a, b])` is the
/// stream for "child b of child a of s".
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |acc, &idx| mix(acc, idx))
}
