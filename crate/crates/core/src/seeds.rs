//! Deterministic seed derivation.
//!
//! Every stochastic step in the crate takes an explicit 64-bit seed; there is
//! no hidden global generator. Sub-seeds (one per replicate, per stream, per
//! sweep stage) are derived with the splitmix64 finalizer so that an external
//! harness can replay any single replicate:
//!
//! `sub_seed = mix(master ^ mix(stream ^ mix(index)))`
//!
//! where `mix` is the splitmix64 output function.

/// Stream tag for adjacency-matrix draws inside the Monte Carlo harness.
pub const STREAM_ADJACENCY: u64 = 1;
/// Stream tag for subsampling-mask draws inside the Monte Carlo harness.
pub const STREAM_MASK: u64 = 2;
/// Stream tag for the per-K0 masks of the sequential estimation sweep.
pub const STREAM_SWEEP: u64 = 3;
/// Stream tag for the Wigner block of the low-rank generator.
pub const STREAM_WIGNER: u64 = 4;
/// Stream tag for the uniform noise block of the low-rank generator.
pub const STREAM_NOISE: u64 = 5;
/// Stream tag for the degree-parameter draws of the DCMM generator.
pub const STREAM_THETA: u64 = 6;

/// splitmix64 output function (Steele, Lea, Flood 2014).
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the sub-seed for (`stream`, `index`) from a master seed.
pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    mix(master ^ mix(stream ^ mix(index)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_is_deterministic_and_spread() {
        assert_eq!(derive(7, STREAM_MASK, 0), derive(7, STREAM_MASK, 0));
        assert_ne!(derive(7, STREAM_MASK, 0), derive(7, STREAM_MASK, 1));
        assert_ne!(derive(7, STREAM_MASK, 0), derive(7, STREAM_ADJACENCY, 0));
        assert_ne!(derive(7, STREAM_MASK, 0), derive(8, STREAM_MASK, 0));
    }
}
