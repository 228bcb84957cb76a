//! Quasiconvex level sets, adjusted normal cones and quasivariational
//! inequalities over polytopes.

pub mod error;
pub mod geometry;
pub mod gqvi;
pub mod instances;
pub mod linalg;
pub mod lp;
pub mod normal_op;
pub mod quasiconvex;
pub mod quasiopt;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::ToleranceConfig;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent deterministic stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
