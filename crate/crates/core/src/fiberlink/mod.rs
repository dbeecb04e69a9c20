//! Single-span, single-channel dual-polarization link: symbol generation,
//! RRC pulse shaping, Manakov split-step propagation, transceiver AWGN
//! loading and a data-aided coherent receiver.
//!
//! Units: time in ps, distance in km, power in W (dBm at the interfaces).

mod link;
mod spectral;
mod noise;
mod pulse;
mod receiver;
mod ssfm;
mod waveform;

pub use link::{awgn_record, evm_db, generate_symbols, min_launch_power, run_awgn, run_link, LinkRun};
pub use noise::{add_rx_noise, add_tx_noise, OSNR_REF_BANDWIDTH_HZ};
pub use pulse::{matched_filter, pulse_shape, rrc_amplitude};
pub use receiver::{receiver_dsp, EqualizedSymbols};
pub use ssfm::{dispersion_filter, propagate as ssfm_propagate, SsfmStats};
pub use waveform::{dbm_to_watts, watts_to_dbm, DualPolWaveform};

use thiserror::Error;

use crate::airmetrics::AirError;
use crate::constellation::ConstellationError;

/// Oversampling used when the nominal rate shows spectral regrowth.
pub const FALLBACK_OVERSAMPLING: usize = 4;
/// Out-of-band power growth (relative to total power) that triggers the
/// fallback oversampling.
pub const ALIAS_THRESHOLD_DB: f64 = -30.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite field at split step {step}")]
    NonFinite { step: usize },
    #[error("symbol alignment failed (peak correlation {peak:.3})")]
    Alignment { peak: f64 },
    #[error(transparent)]
    Air(#[from] AirError),
    #[error(transparent)]
    Constellation(#[from] ConstellationError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberConfig {
    pub alpha_db_per_km: f64,
    pub beta2_ps2_per_km: f64,
    pub gamma_per_w_km: f64,
    pub span_length_km: f64,
    pub steps_per_span: usize,
    pub symbol_rate_gbd: f64,
    /// Samples per symbol.
    pub oversampling: usize,
    pub rrc_rolloff: f64,
    /// Symbols dropped from the record, split evenly between both ends.
    pub discard_symbols: usize,
}

impl Default for FiberConfig {
    fn default() -> Self {
        Self {
            alpha_db_per_km: 0.2,
            beta2_ps2_per_km: -21.68,
            gamma_per_w_km: 1.2,
            span_length_km: 160.0,
            steps_per_span: 1000,
            symbol_rate_gbd: 59.84,
            oversampling: 2,
            rrc_rolloff: 0.05,
            discard_symbols: 1024,
        }
    }
}

impl FiberConfig {
    pub fn validate(&self) -> Result<(), FiberError> {
        let bad = |msg: &str| Err(FiberError::InvalidConfig(msg.to_string()));
        if self.steps_per_span < 1 {
            return bad("steps_per_span must be >= 1");
        }
        if self.oversampling < 2 {
            return bad("oversampling must be >= 2");
        }
        if !(self.span_length_km >= 0.0) || !self.span_length_km.is_finite() {
            return bad("span_length_km must be a non-negative number");
        }
        if !(self.symbol_rate_gbd > 0.0) {
            return bad("symbol_rate_gbd must be positive");
        }
        if !(self.rrc_rolloff > 0.0 && self.rrc_rolloff <= 1.0) {
            return bad("rrc_rolloff must be in (0, 1]");
        }
        if !(self.alpha_db_per_km >= 0.0) {
            return bad("alpha_db_per_km must be non-negative");
        }
        if !self.beta2_ps2_per_km.is_finite() || !self.gamma_per_w_km.is_finite() {
            return bad("beta2 and gamma must be finite");
        }
        Ok(())
    }

    /// Field power attenuation coefficient in 1/km.
    pub fn alpha_linear(&self) -> f64 {
        self.alpha_db_per_km / (10.0 * std::f64::consts::LOG10_E)
    }

    pub fn symbol_rate_hz(&self) -> f64 {
        self.symbol_rate_gbd * 1e9
    }

    pub fn span_loss_db(&self) -> f64 {
        self.alpha_db_per_km * self.span_length_km
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpairmentConfig {
    /// In-band OSNR re 0.1 nm at the transmitter; `None` disables TX noise.
    pub tx_osnr_db: Option<f64>,
    pub rx_min_input_dbm: f64,
    /// Receiver noise power re the symbol-rate bandwidth; `None` disables it.
    pub rx_noise_power_dbm: Option<f64>,
    pub launch_power_dbm: f64,
    /// Reject launch powers whose received power falls below the minimum.
    pub enforce_rx_min: bool,
}

impl Default for ImpairmentConfig {
    fn default() -> Self {
        Self {
            tx_osnr_db: Some(34.0),
            rx_min_input_dbm: -20.0,
            rx_noise_power_dbm: Some(-33.5),
            launch_power_dbm: 12.0,
            enforce_rx_min: false,
        }
    }
}

impl ImpairmentConfig {
    pub fn noiseless(launch_power_dbm: f64) -> Self {
        Self {
            tx_osnr_db: None,
            rx_noise_power_dbm: None,
            launch_power_dbm,
            ..Self::default()
        }
    }

    pub fn validate(&self, fiber: &FiberConfig) -> Result<(), FiberError> {
        if !self.launch_power_dbm.is_finite() {
            return Err(FiberError::InvalidConfig("launch_power_dbm must be finite".into()));
        }
        if self.enforce_rx_min {
            let min = min_launch_power(fiber.span_length_km, self.rx_min_input_dbm, fiber.alpha_db_per_km);
            if self.launch_power_dbm < min {
                return Err(FiberError::InvalidConfig(format!(
                    "launch power {} dBm below the {min} dBm needed for {} dBm at the receiver",
                    self.launch_power_dbm, self.rx_min_input_dbm
                )));
            }
        }
        Ok(())
    }
}
