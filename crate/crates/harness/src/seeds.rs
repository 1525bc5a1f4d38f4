//! Per-task seeds derived from a master seed.
//!
//! A seed for task `(a, b, c, ...)` is obtained by folding each component
//! into a SplitMix64 state, so it depends only on the master seed and the
//! task's coordinates, never on execution order.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master.wrapping_add(GOLDEN)), |s, &c| {
        mix(s ^ mix(c.wrapping_add(GOLDEN)))
    })
}
