//! Seed derivation helpers shared by the sweep harness and the gradient
//! grid: a SplitMix64-style avalanche over absorbed words.

/// SplitMix64 finalizer (Steele, Lea, Flood 2014 constants).
pub(crate) fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Absorbs one word into a running state: XOR then finalize. Word order
/// matters, so permuted tuples land on different states.
pub(crate) fn absorb(state: u64, word: u64) -> u64 {
    mix(state ^ word.wrapping_add(0x9e37_79b9_7f4a_7c15))
}
