//! Inner (128,119) double-extended Hamming code with hard-decision and
//! Chase-I decoding, a seeded bit interleaver and a post-FEC BER harness.

mod code;
mod harness;
mod interleave;

pub use code::{DecodeStatus, HammingCode, CODE_K, CODE_N, MAX_CHASE_Q, PARITY_ROWS};
pub use harness::{postfec_ber, DecoderMode, FecReport, DEFAULT_CHASE_Q, OPERATING_PRE_FEC_BER, SCC_FEC_LIMIT};
pub use interleave::{deinterleave, interleave, permutation};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FecError {
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("bit value {0} is not 0 or 1")]
    NotBinary(u8),
    #[error("stream of {0} bits holds no complete codeword")]
    InsufficientData(usize),
    #[error("Chase budget q={0} exceeds {max}", max = MAX_CHASE_Q)]
    InvalidBudget(usize),
}
