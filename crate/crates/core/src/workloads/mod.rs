//! Request-sequence generators.
//!
//! Every cache stream draws from its own ChaCha8 stream (`set_stream(j)` on a
//! generator seeded by the run seed), and each i.i.d. request consumes exactly
//! one draw. Stream `j` can therefore be regenerated alone and matches what it
//! produced inside a full-bank run.

pub mod adversarial;
pub mod correlated;
pub mod zipf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use adversarial::{adversarial_initial_bank, adversarial_stream, AdversarialWorkload};
pub use correlated::{
    estimate_completions, estimate_ptilde, next_correlated_request, CorrelatedWorkload,
    GroupedCorrelatedModel, PtildeEstimate, StreamState,
};
pub use zipf::{sample_iid_batch, zipf_pmf, IidWorkload, ZipfPopularity};

/// Independent random stream `stream` of the run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
