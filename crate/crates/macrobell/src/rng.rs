//! Counter-based randomness splitting.
//!
//! All randomness in the crate flows from one 64-bit master seed. Each
//! consumer derives an independent ChaCha8 stream from
//! `(master seed, domain, index)`: the seed bytes come from a SplitMix64
//! chain over the master seed and a domain tag, and the index selects one of
//! ChaCha's 2^64 counter streams. Deriving a stream is O(1), so trials can
//! be generated in parallel in any order and still reproduce bit-identical
//! results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// Stable tags separating the crate's randomness consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Trials,
    Bootstrap,
    GameRounds,
    Noise,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Trials => 0x7472_6961_6c73_0001,
            Domain::Bootstrap => 0x626f_6f74_7374_0002,
            Domain::GameRounds => 0x6761_6d65_726e_0003,
            Domain::Noise => 0x6e6f_6973_6500_0004,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the RNG for one unit of work (one trial, one round, one
/// bootstrap replicate).
pub fn derive_rng(master_seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ domain.tag();
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(index);
    rng
}

/// Draw joint counts over four outcome cells from a multinomial with `n`
/// draws, by conditional binomials. `probs` must be a probability vector;
/// tiny negative residuals from float round-off are clamped.
pub fn multinomial4<R: rand::Rng>(n: u64, probs: [f64; 4], rng: &mut R) -> [u64; 4] {
    let mut counts = [0u64; 4];
    let mut remaining = n;
    let mut tail = 1.0f64;
    for cell in 0..3 {
        if remaining == 0 {
            break;
        }
        let p = (probs[cell] / tail).clamp(0.0, 1.0);
        let draw = if p >= 1.0 {
            remaining
        } else if p <= 0.0 {
            0
        } else {
            Binomial::new(remaining, p)
                .expect("clamped probability is valid")
                .sample(rng)
        };
        counts[cell] = draw;
        remaining -= draw;
        tail = (tail - probs[cell]).max(0.0);
    }
    counts[3] = remaining;
    counts
}
