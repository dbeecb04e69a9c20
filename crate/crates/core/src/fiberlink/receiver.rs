use num_complex::Complex64;

use super::pulse::filter_and_sample;
use super::ssfm::dispersion_filter;
use super::{DualPolWaveform, FiberConfig, FiberError};
use crate::airmetrics::SymbolRecord;
use crate::constellation::Point4;

const ALIGN_SEARCH: isize = 16;
const ALIGN_WINDOW: usize = 4096;
const ALIGN_MIN_PEAK: f64 = 0.2;

/// Receiver output before edge trimming.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedSymbols {
    pub symbols: Vec<Point4>,
    /// Symbol lag found by the correlator.
    pub lag: isize,
    /// Complex gain removed from each polarization.
    pub gains: [Complex64; 2],
}

fn to_complex(s: &Point4) -> [Complex64; 2] {
    [Complex64::new(s[0], s[1]), Complex64::new(s[2], s[3])]
}

fn find_lag(rx: &[[Complex64; 2]], tx: &[[Complex64; 2]]) -> Result<isize, FiberError> {
    let n = rx.len() as isize;
    let w = ALIGN_WINDOW.min(rx.len());
    let tx_energy: f64 = tx[..w].iter().map(|t| t[0].norm_sqr()).sum();
    let mut best = (0isize, -1.0f64);
    for lag in -ALIGN_SEARCH..=ALIGN_SEARCH {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut rx_energy = 0.0;
        for (i, t) in tx[..w].iter().enumerate() {
            let r = rx[(i as isize + lag).rem_euclid(n) as usize][0];
            acc += r * t[0].conj();
            rx_energy += r.norm_sqr();
        }
        let peak = acc.norm() / (tx_energy * rx_energy).sqrt().max(f64::MIN_POSITIVE);
        if peak > best.1 {
            best = (lag, peak);
        }
    }
    if best.1 < ALIGN_MIN_PEAK {
        return Err(FiberError::Alignment { peak: best.1 });
    }
    Ok(best.0)
}

/// Chromatic dispersion compensation, matched filtering, symbol-rate
/// sampling, correlation alignment and one least-squares complex gain per
/// polarization fitted against the known transmitted symbols.
pub fn equalize(
    wave: &DualPolWaveform,
    cfg: &FiberConfig,
    tx_symbols: &[Point4],
) -> Result<EqualizedSymbols, FiberError> {
    let n = wave.len();
    let cdc = dispersion_filter(n, wave.sample_rate_hz, cfg.beta2_ps2_per_km, -cfg.span_length_km);
    let sampled = filter_and_sample(wave, cfg, |k| cdc[k]);
    if sampled.len() != tx_symbols.len() {
        return Err(FiberError::InvalidConfig(format!(
            "{} received symbols for {} transmitted",
            sampled.len(),
            tx_symbols.len()
        )));
    }
    let tx: Vec<[Complex64; 2]> = tx_symbols.iter().map(to_complex).collect();
    let lag = find_lag(&sampled, &tx)?;
    let d = sampled.len() as isize;
    let aligned: Vec<[Complex64; 2]> = (0..d)
        .map(|i| sampled[(i + lag).rem_euclid(d) as usize])
        .collect();
    let mut gains = [Complex64::new(1.0, 0.0); 2];
    for (p, g) in gains.iter_mut().enumerate() {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (r, t) in aligned.iter().zip(&tx) {
            num += r[p] * t[p].conj();
            den += t[p].norm_sqr();
        }
        if den > 0.0 && num.norm() > 0.0 {
            *g = num / den;
        }
    }
    let symbols = aligned
        .iter()
        .map(|r| {
            let a = r[0] / gains[0];
            let b = r[1] / gains[1];
            [a.re, a.im, b.re, b.im]
        })
        .collect();
    Ok(EqualizedSymbols {
        symbols,
        lag,
        gains,
    })
}

/// [`equalize`] followed by dropping `cfg.discard_symbols` edge symbols.
pub fn receiver_dsp(
    wave: &DualPolWaveform,
    cfg: &FiberConfig,
    tx_symbols: &[Point4],
    tx_index: &[usize],
) -> Result<SymbolRecord, FiberError> {
    let eq = equalize(wave, cfg, tx_symbols)?;
    let head = cfg.discard_symbols / 2;
    let tail = cfg.discard_symbols - head;
    if head + tail >= tx_index.len() {
        return Err(FiberError::InvalidConfig(format!(
            "discarding {} symbols leaves nothing of {}",
            cfg.discard_symbols,
            tx_index.len()
        )));
    }
    let keep = head..tx_index.len() - tail;
    Ok(SymbolRecord::new(
        tx_index[keep.clone()].to_vec(),
        eq.symbols[keep].to_vec(),
    )?)
}
