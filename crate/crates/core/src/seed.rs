//! Deterministic derivation of per-trial random sources.
//!
//! Every Monte Carlo entry point takes a `master_seed` and derives one
//! independent ChaCha stream per trial, so trial `t` can be replayed in
//! isolation and results never depend on how trials were scheduled
//! across worker threads.
//!
//! Splitting rule: starting from the master seed, each label (a purpose
//! tag, then the trial index) is folded in by an odd-constant multiply
//! followed by a SplitMix64 finalizer round; eight further SplitMix64
//! outputs form the 256-bit ChaCha key.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent random source from a master seed and a list of
/// labels (e.g. a purpose tag and a trial index).
pub fn derive_rng(master_seed: u64, labels: &[u64]) -> ChaCha12Rng {
    let mut state = master_seed;
    for &label in labels {
        // odd multiplier spreads small consecutive labels across the word
        state ^= label.wrapping_mul(0xA24B_AED4_963E_E407);
        splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Stream labels keep RNG lanes for different purposes disjoint even when
/// trial indices collide.
pub mod stream {
    pub const OBSERVATIONS: u64 = 1;
    pub const KL: u64 = 2;
    pub const MTFA: u64 = 3;
    pub const WADD: u64 = 4;
}
