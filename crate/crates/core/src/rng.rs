//! Named, independently seeded random streams.
//!
//! Every consumer of randomness derives a ChaCha8 stream from the run seed, a
//! label and an index, so results do not depend on scheduling or thread count.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::qstate::PureState;

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stream `index` of the family `label` under `seed`.
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(label));
    rng.set_stream(index);
    rng
}

/// Draw a fresh 64-bit seed from a caller-supplied generator.
pub fn child_seed(rng: &mut dyn RngCore) -> u64 {
    rng.next_u64()
}

/// Haar-random pure state on `n` qubits.
pub fn haar_state(n: usize, rng: &mut dyn RngCore) -> PureState {
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    PureState::normalized(n, amps).expect("gaussian vector has nonzero norm")
}
