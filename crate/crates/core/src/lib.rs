//! Oracle-efficient algorithms for large-action contextual bandits, bandit
//! model selection (regret and pure exploration) and active learning with
//! abstention, plus instance generators and an experiment harness.

pub mod al_abstain;
pub mod benchmark;
pub mod cb_large;
pub mod error;
pub mod harness;
pub mod instance;
pub mod linalg;
pub mod ms_regret;
pub mod pe_select;
pub mod regress;
pub mod spanner;

pub use error::{Error, Result};
pub use instance::{ActionDistribution, Instance, Noise, RunRecord};

/// Deterministic RNG used everywhere.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate RNG from a 64-bit seed.
pub fn seeded(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
