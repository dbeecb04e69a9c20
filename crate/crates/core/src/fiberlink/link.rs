use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{
    add_rx_noise, add_tx_noise, pulse_shape, receiver_dsp, ssfm_propagate, watts_to_dbm,
    FiberConfig, FiberError, ImpairmentConfig, ALIAS_THRESHOLD_DB, FALLBACK_OVERSAMPLING,
};
use crate::airmetrics::{air_report, AirReport, LlrFrame, SymbolRecord};
use crate::constellation::{norm_sq, Constellation, Point4};
use crate::rng::{stream, Stream};

/// Output of one end-to-end link evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRun {
    pub record: SymbolRecord,
    pub frame: LlrFrame,
    pub air: AirReport,
    /// Samples per symbol the propagation finally used.
    pub oversampling: usize,
    pub received_power_dbm: f64,
}

/// Draws `count` i.i.d. symbols from the constellation pmf.
pub fn generate_symbols(c: &Constellation, count: usize, seed: u64) -> (Vec<usize>, Vec<Point4>) {
    let mut rng = stream(seed, Stream::Symbols);
    let dist = WeightedIndex::new(c.pmf()).expect("validated pmf");
    let index: Vec<usize> = (0..count).map(|_| dist.sample(&mut rng)).collect();
    let symbols = index.iter().map(|&i| c.points()[i]).collect();
    (index, symbols)
}

/// Launch power that delivers `rx_min_input_dbm` after the span loss.
pub fn min_launch_power(span_length_km: f64, rx_min_input_dbm: f64, alpha_db_per_km: f64) -> f64 {
    rx_min_input_dbm + alpha_db_per_km * span_length_km
}

/// Error vector magnitude of a record against its transmitted points, dB.
pub fn evm_db(rec: &SymbolRecord, c: &Constellation) -> f64 {
    let mut err = 0.0;
    let mut sig = 0.0;
    for (y, &i) in rec.rx().iter().zip(rec.tx_index()) {
        let x = &c.points()[i];
        err += norm_sq(&[y[0] - x[0], y[1] - x[1], y[2] - x[2], y[3] - x[3]]);
        sig += norm_sq(x);
    }
    10.0 * (err / sig).log10()
}

/// Full chain: symbols, shaping, TX noise, SSFM, RX noise, receiver DSP,
/// noise-variance estimate, LLRs and rates. Deterministic in `seed`.
///
/// When spectral regrowth at the nominal oversampling exceeds
/// [`ALIAS_THRESHOLD_DB`], the chain is rerun at [`FALLBACK_OVERSAMPLING`].
pub fn run_link(
    c: &Constellation,
    fiber: &FiberConfig,
    imp: &ImpairmentConfig,
    count: usize,
    seed: u64,
) -> Result<LinkRun, FiberError> {
    fiber.validate()?;
    imp.validate(fiber)?;
    let (index, symbols) = generate_symbols(c, count, seed);
    let mut cfg = fiber.clone();
    let received = loop {
        let tx = add_tx_noise(&pulse_shape(&symbols, &cfg), imp.tx_osnr_db, seed);
        let (out, stats) = ssfm_propagate(&tx, &cfg, imp.launch_power_dbm)?;
        if cfg.oversampling < FALLBACK_OVERSAMPLING
            && stats.out_of_band_growth_db() > ALIAS_THRESHOLD_DB
        {
            cfg.oversampling = FALLBACK_OVERSAMPLING;
            continue;
        }
        break out;
    };
    let received_power_dbm = watts_to_dbm(received.power());
    let noisy = add_rx_noise(&received, imp.rx_noise_power_dbm, cfg.symbol_rate_hz(), seed);
    let record = receiver_dsp(&noisy, &cfg, &symbols, &index)?;
    let (air, frame) = air_report(&record, c)?;
    Ok(LinkRun {
        record,
        frame,
        air,
        oversampling: cfg.oversampling,
        received_power_dbm,
    })
}

/// Transmitted symbols plus 4D white Gaussian noise at `snr_db` relative to
/// the constellation's mean energy; the fiber is bypassed.
pub fn awgn_record(c: &Constellation, snr_db: f64, count: usize, seed: u64) -> SymbolRecord {
    let (index, symbols) = generate_symbols(c, count, seed);
    let sigma2 = c.mean_energy() * 10f64.powf(-snr_db / 10.0);
    let sd = (sigma2 / 4.0).sqrt();
    let mut rng = stream(seed, Stream::Awgn);
    let rx = symbols
        .iter()
        .map(|x| {
            let mut y = *x;
            for v in &mut y {
                *v += sd * rng.sample::<f64, _>(StandardNormal);
            }
            y
        })
        .collect();
    SymbolRecord::new(index, rx).expect("finite samples")
}

/// Rates over the fiber-bypassed AWGN channel.
pub fn run_awgn(c: &Constellation, snr_db: f64, count: usize, seed: u64) -> Result<LinkRun, FiberError> {
    let record = awgn_record(c, snr_db, count, seed);
    let (air, frame) = air_report(&record, c)?;
    Ok(LinkRun {
        record,
        frame,
        air,
        oversampling: 1,
        received_power_dbm: f64::NAN,
    })
}
