use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The PRNG used for every stochastic decision in a run.
pub type SimRng = ChaCha8Rng;

/// Independent per-component streams derived from one scenario seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Discipline = 1,
    Traffic = 2,
}

pub fn stream(seed: u64, which: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
