use num_complex::Complex64;

use super::spectral::{bin_frequency, Transform};
use super::{DualPolWaveform, FiberConfig};
use crate::constellation::Point4;

/// Root-raised-cosine amplitude response at frequency `f` (in units of the
/// symbol rate), unit gain in the passband.
pub fn rrc_amplitude(f: f64, rolloff: f64) -> f64 {
    let f = f.abs();
    let lo = 0.5 * (1.0 - rolloff);
    let hi = 0.5 * (1.0 + rolloff);
    if f <= lo {
        1.0
    } else if f < hi {
        (0.5 * (1.0 + (std::f64::consts::PI / rolloff * (f - lo)).cos())).sqrt()
    } else {
        0.0
    }
}

pub(crate) fn rrc_taps(n: usize, cfg: &FiberConfig) -> Vec<f64> {
    let fs = cfg.symbol_rate_hz() * cfg.oversampling as f64;
    (0..n)
        .map(|k| rrc_amplitude(bin_frequency(k, n, fs) / cfg.symbol_rate_hz(), cfg.rrc_rolloff))
        .collect()
}

/// Circular RRC pulse shaping at `cfg.oversampling` samples per symbol. The
/// output's mean power equals the symbols' mean energy.
pub fn pulse_shape(symbols: &[Point4], cfg: &FiberConfig) -> DualPolWaveform {
    let sps = cfg.oversampling;
    let n = symbols.len() * sps;
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for (i, s) in symbols.iter().enumerate() {
        x[i * sps] = Complex64::new(s[0], s[1]);
        y[i * sps] = Complex64::new(s[2], s[3]);
    }
    let taps = rrc_taps(n, cfg);
    let mut fft = Transform::new(n);
    for pol in [&mut x, &mut y] {
        fft.forward(pol);
        for (v, h) in pol.iter_mut().zip(&taps) {
            *v *= sps as f64 * h;
        }
        fft.inverse(pol);
    }
    DualPolWaveform::new(x, y, cfg.symbol_rate_hz() * sps as f64)
}

/// Applies `extra(k)` times the RRC response in the frequency domain, then
/// samples at the symbol instants.
pub(crate) fn filter_and_sample(
    wave: &DualPolWaveform,
    cfg: &FiberConfig,
    extra: impl Fn(usize) -> Complex64,
) -> Vec<[Complex64; 2]> {
    let n = wave.len();
    let sps = (wave.sample_rate_hz / cfg.symbol_rate_hz()).round() as usize;
    let mut probe = cfg.clone();
    probe.oversampling = sps;
    let taps = rrc_taps(n, &probe);
    let mut fft = Transform::new(n);
    let mut out = vec![[Complex64::new(0.0, 0.0); 2]; n / sps];
    for (p, src) in [&wave.x, &wave.y].into_iter().enumerate() {
        let mut buf = src.clone();
        fft.forward(&mut buf);
        for (k, (v, h)) in buf.iter_mut().zip(&taps).enumerate() {
            *v *= extra(k) * *h;
        }
        fft.inverse(&mut buf);
        for (i, o) in out.iter_mut().enumerate() {
            o[p] = buf[i * sps];
        }
    }
    out
}

/// RRC matched filter followed by symbol-rate sampling.
pub fn matched_filter(wave: &DualPolWaveform, cfg: &FiberConfig) -> Vec<[Complex64; 2]> {
    filter_and_sample(wave, cfg, |_| Complex64::new(1.0, 0.0))
}
