use num_complex::Complex64;

use super::spectral::{bin_frequency, Transform};
use super::{dbm_to_watts, DualPolWaveform, FiberConfig, FiberError};

/// Manakov nonlinear coefficient factor for randomly varying birefringence.
const MANAKOV_FACTOR: f64 = 8.0 / 9.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsfmStats {
    /// Fraction of power outside the RRC band at the input and the output.
    pub out_of_band_in: f64,
    pub out_of_band_out: f64,
}

impl SsfmStats {
    /// Growth of out-of-band power fraction, in dB re total power.
    pub fn out_of_band_growth_db(&self) -> f64 {
        10.0 * (self.out_of_band_out - self.out_of_band_in).max(1e-30).log10()
    }
}

fn angular_frequencies(n: usize, fs_hz: f64) -> Vec<f64> {
    // rad/ps
    (0..n)
        .map(|k| 2.0 * std::f64::consts::PI * bin_frequency(k, n, fs_hz) * 1e-12)
        .collect()
}

/// exp(i beta2/2 w^2 z) for every bin, the linear dispersion over `z` km.
pub fn dispersion_filter(n: usize, fs_hz: f64, beta2_ps2_per_km: f64, z_km: f64) -> Vec<Complex64> {
    angular_frequencies(n, fs_hz)
        .into_iter()
        .map(|w| Complex64::from_polar(1.0, 0.5 * beta2_ps2_per_km * w * w * z_km))
        .collect()
}

fn linear_operator(cfg: &FiberConfig, w: &[f64], z_km: f64) -> Vec<Complex64> {
    let field_loss = (-0.5 * cfg.alpha_linear() * z_km).exp();
    w.iter()
        .map(|&w| Complex64::from_polar(field_loss, 0.5 * cfg.beta2_ps2_per_km * w * w * z_km))
        .collect()
}

fn out_of_band_fraction(x: &[Complex64], y: &[Complex64], band_edge: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut out = 0.0;
    for ((a, b), &oob) in x.iter().zip(y).zip(band_edge) {
        let p = a.norm_sqr() + b.norm_sqr();
        total += p;
        if oob {
            out += p;
        }
    }
    if total > 0.0 {
        out / total
    } else {
        0.0
    }
}

/// Scales the waveform to `launch_power_dbm` and integrates the Manakov
/// equation over one span with the symmetric split-step Fourier method:
/// half linear step, then alternating full nonlinear and full linear steps,
/// closing with a half linear step.
pub fn propagate(
    wave: &DualPolWaveform,
    cfg: &FiberConfig,
    launch_power_dbm: f64,
) -> Result<(DualPolWaveform, SsfmStats), FiberError> {
    cfg.validate()?;
    let n = wave.len();
    let mut out = wave.clone();
    let p = out.power();
    if p > 0.0 {
        out.scale((dbm_to_watts(launch_power_dbm) / p).sqrt());
    }
    let steps = cfg.steps_per_span;
    let h = cfg.span_length_km / steps as f64;
    let alpha = cfg.alpha_linear();
    let h_eff = if alpha > 0.0 {
        (1.0 - (-alpha * h).exp()) / alpha
    } else {
        h
    };
    let nl = MANAKOV_FACTOR * cfg.gamma_per_w_km * h_eff;

    let w = angular_frequencies(n, wave.sample_rate_hz);
    let edge = 0.5 * (1.0 + cfg.rrc_rolloff) * cfg.symbol_rate_hz();
    let oob: Vec<bool> = (0..n)
        .map(|k| bin_frequency(k, n, wave.sample_rate_hz).abs() > edge)
        .collect();
    let half = linear_operator(cfg, &w, 0.5 * h);
    let full = linear_operator(cfg, &w, h);

    let mut fft = Transform::new(n);
    let DualPolWaveform { x, y, .. } = &mut out;
    fft.forward(x);
    fft.forward(y);
    let out_of_band_in = out_of_band_fraction(x, y, &oob);
    for (v, d) in x.iter_mut().zip(&half).chain(y.iter_mut().zip(&half)) {
        *v *= d;
    }
    let mut out_of_band_out = out_of_band_in;
    for step in 0..steps {
        fft.inverse(x);
        fft.inverse(y);
        if nl != 0.0 {
            for (a, b) in x.iter_mut().zip(y.iter_mut()) {
                let phi = nl * (a.norm_sqr() + b.norm_sqr());
                if !phi.is_finite() {
                    return Err(FiberError::NonFinite { step });
                }
                let rot = Complex64::from_polar(1.0, phi);
                *a *= rot;
                *b *= rot;
            }
        }
        fft.forward(x);
        fft.forward(y);
        let op = if step + 1 == steps {
            out_of_band_out = out_of_band_fraction(x, y, &oob);
            &half
        } else {
            &full
        };
        for (v, d) in x.iter_mut().zip(op).chain(y.iter_mut().zip(op)) {
            *v *= d;
        }
    }
    fft.inverse(x);
    fft.inverse(y);
    if !out.is_finite() {
        return Err(FiberError::NonFinite { step: steps });
    }
    Ok((
        out,
        SsfmStats {
            out_of_band_in,
            out_of_band_out,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::build_pm16qam;
    use crate::fiberlink::{generate_symbols, pulse_shape, watts_to_dbm};

    fn test_wave(cfg: &FiberConfig, n: usize) -> DualPolWaveform {
        let (_, syms) = generate_symbols(&build_pm16qam(), n, 7);
        pulse_shape(&syms, cfg)
    }

    fn rel_error_db(a: &DualPolWaveform, b: &DualPolWaveform) -> f64 {
        let mut err = 0.0;
        let mut sig = 0.0;
        for (u, v) in a.x.iter().chain(&a.y).zip(b.x.iter().chain(&b.y)) {
            err += (u - v).norm_sqr();
            sig += v.norm_sqr();
        }
        10.0 * (err / sig).log10()
    }

    #[test]
    fn dispersion_only_is_invertible() {
        let cfg = FiberConfig {
            alpha_db_per_km: 0.0,
            gamma_per_w_km: 0.0,
            steps_per_span: 20,
            ..FiberConfig::default()
        };
        let wave = test_wave(&cfg, 2048);
        let (mut out, _) = propagate(&wave, &cfg, 0.0).unwrap();
        let inv = dispersion_filter(out.len(), out.sample_rate_hz, cfg.beta2_ps2_per_km, -cfg.span_length_km);
        let mut fft = Transform::new(out.len());
        for pol in [&mut out.x, &mut out.y] {
            fft.forward(pol);
            for (v, d) in pol.iter_mut().zip(&inv) {
                *v *= d;
            }
            fft.inverse(pol);
        }
        let mut reference = wave.clone();
        reference.scale((1e-3 / wave.power()).sqrt());
        assert!(rel_error_db(&out, &reference) < -40.0);
    }

    #[test]
    fn lossless_nonlinear_conserves_power() {
        let cfg = FiberConfig {
            alpha_db_per_km: 0.0,
            steps_per_span: 100,
            ..FiberConfig::default()
        };
        let wave = test_wave(&cfg, 2048);
        let (out, _) = propagate(&wave, &cfg, 16.0).unwrap();
        let want = dbm_to_watts(16.0);
        assert!(((out.power() - want) / want).abs() < 1e-6);
    }

    #[test]
    fn loss_accounting() {
        let cfg = FiberConfig {
            gamma_per_w_km: 0.0,
            span_length_km: 80.0,
            steps_per_span: 10,
            ..FiberConfig::default()
        };
        let wave = test_wave(&cfg, 1024);
        let (out, _) = propagate(&wave, &cfg, 3.0).unwrap();
        assert!((watts_to_dbm(out.power()) - (3.0 - 16.0)).abs() < 1e-9);
    }

    #[test]
    fn spectral_growth_with_power() {
        let cfg = FiberConfig {
            steps_per_span: 100,
            ..FiberConfig::default()
        };
        let wave = test_wave(&cfg, 2048);
        let (_, low) = propagate(&wave, &cfg, -10.0).unwrap();
        let (_, high) = propagate(&wave, &cfg, 18.0).unwrap();
        assert!(high.out_of_band_growth_db() > low.out_of_band_growth_db());
    }

    #[test]
    fn overflowing_field_reports_step() {
        let cfg = FiberConfig {
            steps_per_span: 5,
            ..FiberConfig::default()
        };
        let wave = test_wave(&cfg, 256);
        let err = propagate(&wave, &cfg, 3100.0).unwrap_err();
        assert!(matches!(err, FiberError::NonFinite { .. }));
    }
}
