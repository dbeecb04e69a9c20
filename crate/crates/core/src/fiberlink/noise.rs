use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{dbm_to_watts, DualPolWaveform};
use crate::rng::{stream, Stream};

/// OSNR reference bandwidth, 0.1 nm at 1550 nm.
pub const OSNR_REF_BANDWIDTH_HZ: f64 = 12.5e9;

/// Adds circular complex Gaussian noise of total (both polarizations)
/// per-sample variance `total_var`.
fn add_white_noise(wave: &mut DualPolWaveform, total_var: f64, mut rng: impl Rng) {
    let sd = (total_var / 4.0).sqrt();
    for v in wave.x.iter_mut().chain(wave.y.iter_mut()) {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(sd * re, sd * im);
    }
}

/// Transmitter noise loading: white noise over the simulation bandwidth
/// such that the noise in a 12.5 GHz reference band is `osnr_db` below the
/// signal power. `None` leaves the waveform untouched.
pub fn add_tx_noise(wave: &DualPolWaveform, osnr_db: Option<f64>, seed: u64) -> DualPolWaveform {
    let mut out = wave.clone();
    if let Some(osnr) = osnr_db {
        let total = wave.power()
            * 10f64.powf(-osnr / 10.0)
            * (wave.sample_rate_hz / OSNR_REF_BANDWIDTH_HZ);
        add_white_noise(&mut out, total, stream(seed, Stream::TxNoise));
    }
    out
}

/// Receiver noise loading: white noise whose power within the symbol-rate
/// bandwidth is `noise_power_dbm` (absolute, both polarizations).
pub fn add_rx_noise(
    wave: &DualPolWaveform,
    noise_power_dbm: Option<f64>,
    symbol_rate_hz: f64,
    seed: u64,
) -> DualPolWaveform {
    let mut out = wave.clone();
    if let Some(dbm) = noise_power_dbm {
        let total = dbm_to_watts(dbm) * wave.sample_rate_hz / symbol_rate_hz;
        add_white_noise(&mut out, total, stream(seed, Stream::RxNoise));
    }
    out
}
