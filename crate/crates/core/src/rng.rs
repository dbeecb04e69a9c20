use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Independent ChaCha streams derived from one user seed, so each random
/// consumer sees the same draws no matter what else runs.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Stream {
    Symbols = 1,
    TxNoise = 2,
    RxNoise = 3,
    Awgn = 4,
    FecInfo = 5,
    Interleaver = 6,
}

pub(crate) fn stream(seed: u64, which: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
