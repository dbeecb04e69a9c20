use rand::Rng;
use rayon::prelude::*;

use super::{interleave, deinterleave, FecError, HammingCode, CODE_K, CODE_N, MAX_CHASE_Q};
use crate::airmetrics::LlrFrame;
use crate::rng::{stream, Stream};

/// Pre-FEC BER the outer staircase code must see for error-free output.
pub const SCC_FEC_LIMIT: f64 = 4.5e-3;
/// Operating pre-FEC BER of the concatenated inner/outer scheme.
pub const OPERATING_PRE_FEC_BER: f64 = 1.25e-2;
pub const DEFAULT_CHASE_Q: usize = 4;
const MIN_ERROR_EVENTS: f64 = 100.0;

const INFO_MASK: u128 = (1u128 << CODE_K) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderMode {
    Hard,
    Chase { q: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FecReport {
    /// Hard-decision BER over the whole LLR frame.
    pub pre_fec_ber: f64,
    pub post_fec_ber: f64,
    pub post_fec_errors: u64,
    pub info_bits: u64,
    pub codewords: usize,
    /// `post_fec_ber <= SCC_FEC_LIMIT`.
    pub pass: bool,
    /// Fewer info bits than needed to observe 100 errors at the limit.
    pub low_confidence: bool,
}

/// Decodes the LLR stream of a link run as if it carried interleaved
/// Hamming codewords.
///
/// The link transmits arbitrary bits `x`. Random information words are
/// encoded and interleaved to a codeword stream `w`, and each LLR is flipped
/// where `x` and `w` differ. For a channel symmetric in the transmitted bit
/// this yields the statistics of actually sending `w`. Trailing bits that do
/// not fill a codeword are ignored by the decoder.
pub fn postfec_ber(
    frame: &LlrFrame,
    code: &HammingCode,
    mode: DecoderMode,
    seed: u64,
) -> Result<FecReport, FecError> {
    if let DecoderMode::Chase { q } = mode {
        if q > MAX_CHASE_Q {
            return Err(FecError::InvalidBudget(q));
        }
    }
    let total = frame.llrs().len();
    let codewords = total / CODE_N;
    if codewords == 0 {
        return Err(FecError::InsufficientData(total));
    }
    let used = codewords * CODE_N;

    let mut rng = stream(seed, Stream::FecInfo);
    let info: Vec<u128> = (0..codewords).map(|_| rng.random::<u128>() & INFO_MASK).collect();
    let mut coded = Vec::with_capacity(used);
    for &u in &info {
        let c = code.encode_word(u);
        coded.extend((0..CODE_N).map(|j| (c >> j & 1) as u8));
    }
    let sent = interleave(&coded, seed);
    let equivalent: Vec<f64> = frame.llrs()[..used]
        .iter()
        .zip(&frame.tx_bits()[..used])
        .zip(&sent)
        .map(|((&l, &x), &w)| if x == w { l } else { -l })
        .collect();
    let received = deinterleave(&equivalent, seed);

    let post_fec_errors: u64 = received
        .par_chunks(CODE_N)
        .zip(info.par_iter())
        .map(|(block, &u)| {
            let c = match mode {
                DecoderMode::Hard => {
                    let hard = block
                        .iter()
                        .enumerate()
                        .fold(0u128, |w, (j, &l)| if l > 0.0 { w | 1 << j } else { w });
                    code.decode_word(hard).0
                }
                DecoderMode::Chase { q } => code.chase_word(block, q),
            };
            ((c ^ u) & INFO_MASK).count_ones() as u64
        })
        .sum();

    let info_bits = (codewords * CODE_K) as u64;
    let post_fec_ber = post_fec_errors as f64 / info_bits as f64;
    Ok(FecReport {
        pre_fec_ber: frame.hard_decision_ber(),
        post_fec_ber,
        post_fec_errors,
        info_bits,
        codewords,
        pass: post_fec_ber <= SCC_FEC_LIMIT,
        low_confidence: (info_bits as f64) * SCC_FEC_LIMIT < MIN_ERROR_EVENTS,
    })
}
