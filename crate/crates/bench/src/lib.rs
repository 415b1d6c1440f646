//! Benchmark fixtures shared by the criterion targets.

use ringmix_core::datagen::{gen_synthetic, SyntheticParams};
use ringmix_core::engines::ProblemInstance;

/// The default synthetic pool at a given module count.
pub fn pool(n: usize, seed: u64) -> ProblemInstance {
    gen_synthetic(&SyntheticParams {
        n,
        seed,
        ..Default::default()
    })
    .expect("valid pool")
}
