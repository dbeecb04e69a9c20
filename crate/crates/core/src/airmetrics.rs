//! Achievable information rates under a mismatched 4D Gaussian auxiliary
//! channel, plus the analytic square-QAM BER used for noise loading.
//!
//! All per-symbol sums over constellation points use max-subtracted
//! log-sum-exp. Per-symbol work is split into fixed-size chunks whose
//! partial results are reduced in index order, so results do not depend on
//! the number of worker threads.

use std::f64::consts::{LN_2, SQRT_2};

use rayon::prelude::*;
use thiserror::Error;

use crate::constellation::{norm_sq, Constellation, Point4};

/// LLR magnitude clamp.
pub const LLR_CLAMP: f64 = 50.0;

const CHUNK: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AirError {
    #[error("symbol record is empty")]
    Empty,
    #[error("noise variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("tx index {index} out of range for a {size}-point constellation")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("tx_index and rx lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("non-finite received sample at symbol {0}")]
    NonFinite(usize),
    #[error("constellation size {0} is not a square power of 4")]
    InvalidQamOrder(usize),
    #[error("target BER {0} is outside (0, 0.5)")]
    InvalidTarget(f64),
}

/// Transmitted constellation indices and the matching received 4D samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolRecord {
    tx_index: Vec<usize>,
    rx: Vec<Point4>,
}

impl SymbolRecord {
    pub fn new(tx_index: Vec<usize>, rx: Vec<Point4>) -> Result<Self, AirError> {
        if tx_index.len() != rx.len() {
            return Err(AirError::LengthMismatch(tx_index.len(), rx.len()));
        }
        if let Some(i) = rx.iter().position(|y| y.iter().any(|v| !v.is_finite())) {
            return Err(AirError::NonFinite(i));
        }
        Ok(Self { tx_index, rx })
    }

    pub fn len(&self) -> usize {
        self.rx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rx.is_empty()
    }

    pub fn tx_index(&self) -> &[usize] {
        &self.tx_index
    }

    pub fn rx(&self) -> &[Point4] {
        &self.rx
    }

    fn check(&self, c: &Constellation) -> Result<(), AirError> {
        if self.is_empty() {
            return Err(AirError::Empty);
        }
        if let Some(&index) = self.tx_index.iter().find(|&&i| i >= c.size()) {
            return Err(AirError::IndexOutOfRange {
                index,
                size: c.size(),
            });
        }
        Ok(())
    }
}

/// Per-symbol, per-bit LLRs `log P(b=1|y) / P(b=0|y)` with the transmitted
/// bits, both stored symbol-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrFrame {
    bits: usize,
    llrs: Vec<f64>,
    tx_bits: Vec<u8>,
}

impl LlrFrame {
    pub fn new(bits: usize, llrs: Vec<f64>, tx_bits: Vec<u8>) -> Self {
        assert!(bits > 0, "LLR frame needs at least one bit per symbol");
        assert_eq!(llrs.len(), tx_bits.len(), "LLR/bit length mismatch");
        assert_eq!(llrs.len() % bits, 0, "LLR count not a multiple of bits");
        Self {
            bits,
            llrs,
            tx_bits,
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    pub fn symbols(&self) -> usize {
        self.llrs.len() / self.bits
    }

    pub fn llrs(&self) -> &[f64] {
        &self.llrs
    }

    pub fn tx_bits(&self) -> &[u8] {
        &self.tx_bits
    }

    /// Fraction of bits whose LLR sign disagrees with the transmitted bit.
    /// A zero LLR decides 0.
    pub fn hard_decision_ber(&self) -> f64 {
        let errors = self
            .llrs
            .iter()
            .zip(&self.tx_bits)
            .filter(|(&l, &b)| u8::from(l > 0.0) != b)
            .count();
        errors as f64 / self.llrs.len() as f64
    }
}

/// A Monte-Carlo mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_terms(terms: impl Iterator<Item = f64> + Clone, n: usize) -> Self {
        let nf = n as f64;
        let mean = terms.clone().sum::<f64>() / nf;
        let var = if n > 1 {
            terms.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / nf).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AirReport {
    /// Bits per 4D symbol.
    pub mi: Estimate,
    pub rbmd: Estimate,
    pub bitwise_mi: Vec<Estimate>,
    /// Total noise variance over the four real dimensions.
    pub sigma2: f64,
}

/// Data-aided total (4D) noise variance: mean of ||y - x||^2.
pub fn estimate_noise_variance(rec: &SymbolRecord, c: &Constellation) -> Result<f64, AirError> {
    rec.check(c)?;
    let points = c.points();
    let sum: f64 = rec
        .rx
        .iter()
        .zip(&rec.tx_index)
        .map(|(y, &i)| dist_sq(y, &points[i]))
        .sum();
    Ok(sum / rec.len() as f64)
}

#[inline]
fn dist_sq(a: &Point4, b: &Point4) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]];
    norm_sq(&d)
}

/// Demapping context shared by the LLR and MI estimators.
struct Demapper<'a> {
    c: &'a Constellation,
    inv_s: f64,
    /// ln(P_j / max P); exactly 0 for every point of a uniform pmf.
    log_weight: Vec<f64>,
    log_pmax: f64,
    bit_table: Vec<u8>,
}

impl<'a> Demapper<'a> {
    fn new(c: &'a Constellation, sigma2: f64) -> Result<Self, AirError> {
        if !(sigma2 > 0.0) {
            return Err(AirError::NonPositiveVariance(sigma2));
        }
        let pmax = c.pmf().iter().cloned().fold(0.0, f64::max);
        let log_weight = c
            .pmf()
            .iter()
            .map(|&p| if p > 0.0 { (p / pmax).ln() } else { f64::NEG_INFINITY })
            .collect();
        let m = c.bits() as usize;
        let mut bit_table = Vec::with_capacity(c.size() * m);
        for j in 0..c.size() {
            for k in 0..m {
                bit_table.push(c.label_bit(j, k));
            }
        }
        Ok(Self {
            c,
            inv_s: 2.0 / sigma2,
            log_weight,
            log_pmax: pmax.ln(),
            bit_table,
        })
    }

    /// Fills `llr` for one received sample and returns the symbol's MI term
    /// in bits given transmitted index `tx`.
    fn symbol(&self, y: &Point4, tx: usize, scratch: &mut [f64], llr: &mut [f64]) -> f64 {
        let points = self.c.points();
        let m = llr.len();
        let mut amax = f64::NEG_INFINITY;
        for (j, (a, x)) in scratch.iter_mut().zip(points).enumerate() {
            *a = self.log_weight[j] - dist_sq(y, x) * self.inv_s;
            amax = amax.max(*a);
        }
        let mut sums = [[0.0f64; 2]; 32];
        let mut total = 0.0;
        for (j, a) in scratch.iter().enumerate() {
            let e = (a - amax).exp();
            total += e;
            let bits = &self.bit_table[j * m..(j + 1) * m];
            for (k, &b) in bits.iter().enumerate() {
                sums[k][b as usize] += e;
            }
        }
        for (k, l) in llr.iter_mut().enumerate() {
            let [zero, one] = sums[k];
            *l = (one.ln() - zero.ln()).clamp(-LLR_CLAMP, LLR_CLAMP);
        }
        let d_tx = dist_sq(y, &points[tx]) * self.inv_s;
        (-d_tx - self.log_pmax - amax - total.ln()) / LN_2
    }

    /// Runs every symbol; returns symbol-major LLRs and per-symbol MI terms.
    fn run(&self, rec: &SymbolRecord) -> (Vec<f64>, Vec<f64>) {
        let m = self.c.bits() as usize;
        let n = rec.len();
        let mut llrs = vec![0.0; n * m];
        let mut mi = vec![0.0; n];
        llrs.par_chunks_mut(CHUNK * m)
            .zip(mi.par_chunks_mut(CHUNK))
            .enumerate()
            .for_each(|(chunk, (llr_chunk, mi_chunk))| {
                let mut scratch = vec![0.0; self.c.size()];
                let base = chunk * CHUNK;
                for (i, (l, t)) in llr_chunk.chunks_mut(m).zip(mi_chunk.iter_mut()).enumerate() {
                    *t = self.symbol(&rec.rx[base + i], rec.tx_index[base + i], &mut scratch, l);
                }
            });
        (llrs, mi)
    }
}

fn tx_bits(rec: &SymbolRecord, c: &Constellation) -> Vec<u8> {
    let m = c.bits() as usize;
    let mut bits = Vec::with_capacity(rec.len() * m);
    for &i in &rec.tx_index {
        for k in 0..m {
            bits.push(c.label_bit(i, k));
        }
    }
    bits
}

/// Bit LLRs under the Gaussian auxiliary channel with the pmf as prior,
/// clamped to +-[`LLR_CLAMP`].
pub fn compute_llrs(
    rec: &SymbolRecord,
    c: &Constellation,
    sigma2: f64,
) -> Result<LlrFrame, AirError> {
    rec.check(c)?;
    let (llrs, _) = Demapper::new(c, sigma2)?.run(rec);
    Ok(LlrFrame::new(c.bits() as usize, llrs, tx_bits(rec, c)))
}

/// Monte-Carlo symbol-metric MI in bits per 4D symbol.
pub fn estimate_mi(rec: &SymbolRecord, c: &Constellation, sigma2: f64) -> Result<Estimate, AirError> {
    rec.check(c)?;
    let (_, mi) = Demapper::new(c, sigma2)?.run(rec);
    Ok(Estimate::from_terms(mi.iter().copied(), mi.len()))
}

/// ln(1 + e^x) without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// log2(1 + e^{(-1)^c L}), the per-bit information loss.
#[inline]
fn bit_loss(llr: f64, bit: u8) -> f64 {
    let x = if bit == 0 { llr } else { -llr };
    softplus(x) / LN_2
}

/// Per-bit MI estimates `1 - mean loss`; this is the accumulation the BMD
/// rate is built from, so their sum matches it bit for bit.
pub fn bitwise_mi(frame: &LlrFrame) -> Vec<Estimate> {
    let m = frame.bits;
    let n = frame.symbols();
    (0..m)
        .map(|k| {
            let losses = (0..n).map(move |i| 1.0 - bit_loss(frame.llrs[i * m + k], frame.tx_bits[i * m + k]));
            Estimate::from_terms(losses, n)
        })
        .collect()
}

/// BMD rate: H(X) - (1/D) sum_k sum_i log2(1 + e^{(-1)^c L}).
///
/// Evaluated as (H(X) - m) + sum_k bitwise_k, which is the same quantity
/// and reduces to the uniform-input GMI exactly when H(X) = m.
pub fn estimate_rbmd(frame: &LlrFrame, pmf: &[f64]) -> Estimate {
    let m = frame.bits;
    let n = frame.symbols();
    let hx = crate::constellation::entropy_bits(pmf);
    let bitwise = bitwise_mi(frame);
    let mean = bitwise.iter().fold(hx - m as f64, |acc, b| acc + b.mean);
    let per_symbol = (0..n).map(|i| {
        hx - (0..m)
            .map(|k| bit_loss(frame.llrs[i * m + k], frame.tx_bits[i * m + k]))
            .sum::<f64>()
    });
    let stderr = Estimate::from_terms(per_symbol, n).stderr;
    Estimate { mean, stderr }
}

/// GMI for uniform inputs: m - (1/D) sum_k sum_i log2(1 + e^{(-1)^c L}).
pub fn estimate_gmi_uniform(frame: &LlrFrame) -> f64 {
    bitwise_mi(frame).iter().fold(0.0, |acc, b| acc + b.mean)
}

/// Noise variance, LLRs and all rates for one record.
pub fn air_report(rec: &SymbolRecord, c: &Constellation) -> Result<(AirReport, LlrFrame), AirError> {
    let sigma2 = estimate_noise_variance(rec, c)?;
    let (llrs, mi_terms) = Demapper::new(c, sigma2)?.run(rec);
    let frame = LlrFrame::new(c.bits() as usize, llrs, tx_bits(rec, c));
    let bitwise = bitwise_mi(&frame);
    let rbmd = estimate_rbmd(&frame, c.pmf());
    let report = AirReport {
        mi: Estimate::from_terms(mi_terms.iter().copied(), mi_terms.len()),
        rbmd,
        bitwise_mi: bitwise,
        sigma2,
    };
    Ok((report, frame))
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

fn qam_side(m_points: usize) -> Result<usize, AirError> {
    let bits = m_points.trailing_zeros() as usize;
    if m_points < 4 || !m_points.is_power_of_two() || bits % 2 != 0 {
        return Err(AirError::InvalidQamOrder(m_points));
    }
    Ok(1 << (bits / 2))
}

/// Approximate BER of Gray-mapped square M-QAM on AWGN at `ebn0_db`.
pub fn analytic_qam_ber(m_points: usize, ebn0_db: f64) -> Result<f64, AirError> {
    let side = qam_side(m_points)?;
    let m = (m_points as f64).log2();
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    let arg = (3.0 * ebn0 * m / (m_points as f64 - 1.0)).sqrt();
    let sum: f64 = (1..=side / 2).map(|i| q_function((2 * i - 1) as f64 * arg)).sum();
    Ok(4.0 / m * (1.0 - 1.0 / side as f64) * sum)
}

/// Inverse of [`analytic_qam_ber`] by bisection, to 1e-4 dB.
pub fn required_ebn0(m_points: usize, target_ber: f64) -> Result<f64, AirError> {
    qam_side(m_points)?;
    if !(target_ber > 0.0 && target_ber < 0.5) {
        return Err(AirError::InvalidTarget(target_ber));
    }
    let (mut lo, mut hi) = (-10.0f64, 40.0f64);
    while hi - lo > 1e-5 {
        let mid = 0.5 * (lo + hi);
        if analytic_qam_ber(m_points, mid)? > target_ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// SNR per M-QAM symbol from Eb/N0, both in dB.
pub fn ebn0_to_snr_db(m_points: usize, ebn0_db: f64) -> f64 {
    ebn0_db + 10.0 * (m_points as f64).log2().log10()
}
