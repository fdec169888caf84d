//! Counter-based seed derivation.
//!
//! Every independent random object (a trial's walk noise, a trial's sweep
//! offsets) gets its own seed computed from a master seed and an index, so
//! results do not depend on the order in which trials are executed.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for element `index` of the family rooted at `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Independent family keyed by a label, e.g. noise vs. instruction offsets.
pub fn derive_family(master: u64, label: &str) -> u64 {
    label
        .bytes()
        .fold(mix64(master ^ GOLDEN_GAMMA), |h, b| mix64(h ^ u64::from(b)))
}
