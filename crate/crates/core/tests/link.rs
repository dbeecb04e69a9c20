use gss4d::airmetrics::analytic_qam_ber;
use gss4d::constellation::build_pm16qam;
use gss4d::fiberlink::{evm_db, run_awgn, run_link, FiberConfig, ImpairmentConfig, OSNR_REF_BANDWIDTH_HZ};
use rayon::prelude::*;

const SYMBOLS: usize = 1 << 16;

fn db_sum(a_db: f64, b_db: f64) -> f64 {
    -10.0 * (10f64.powf(-a_db / 10.0) + 10f64.powf(-b_db / 10.0)).log10()
}

#[test]
fn linear_link_matches_awgn_oracle() {
    let c = build_pm16qam();
    let fiber = FiberConfig {
        gamma_per_w_km: 0.0,
        ..FiberConfig::default()
    };
    let imp = ImpairmentConfig::default();
    let run = run_link(&c, &fiber, &imp, SYMBOLS, 3).unwrap();
    assert!((run.received_power_dbm - -20.0).abs() < 0.05);
    let tx_snr = imp.tx_osnr_db.unwrap() + 10.0 * (OSNR_REF_BANDWIDTH_HZ / fiber.symbol_rate_hz()).log10();
    let rx_snr = run.received_power_dbm - imp.rx_noise_power_dbm.unwrap();
    let oracle = run_awgn(&c, db_sum(tx_snr, rx_snr), SYMBOLS, 3).unwrap();
    let gap = (run.air.rbmd.mean - oracle.air.rbmd.mean).abs();
    assert!(gap < 0.05, "link {} vs oracle {}", run.air.rbmd.mean, oracle.air.rbmd.mean);
}

#[test]
fn pre_fec_ber_consistent_with_noise_estimate() {
    let c = build_pm16qam();
    let run = run_link(&c, &FiberConfig::default(), &ImpairmentConfig::default(), SYMBOLS, 4).unwrap();
    let snr_db = 10.0 * (c.mean_energy() / run.air.sigma2).log10();
    let predicted = analytic_qam_ber(16, snr_db - 10.0 * 4f64.log10()).unwrap();
    let measured = run.frame.hard_decision_ber();
    let rel = (measured - predicted).abs() / predicted;
    assert!(rel < 0.1, "measured {measured:.4e} vs predicted {predicted:.4e}");
}

#[test]
fn halving_the_step_count_barely_moves_evm() {
    let c = build_pm16qam();
    let imp = ImpairmentConfig::noiseless(10.0);
    let evm = |steps| {
        let fiber = FiberConfig {
            steps_per_span: steps,
            ..FiberConfig::default()
        };
        let run = run_link(&c, &fiber, &imp, 1 << 14, 5).unwrap();
        evm_db(&run.record, &c)
    };
    let (fine, coarse) = (evm(1000), evm(500));
    assert!((fine - coarse).abs() < 0.1, "1000 steps {fine:.3} dB, 500 steps {coarse:.3} dB");
}

#[test]
fn mi_is_unimodal_in_launch_power() {
    let c = build_pm16qam();
    let fiber = FiberConfig {
        steps_per_span: 200,
        ..FiberConfig::default()
    };
    let powers: Vec<f64> = (4..=20).map(f64::from).collect();
    let mi: Vec<f64> = powers
        .par_iter()
        .map(|&p| {
            let imp = ImpairmentConfig {
                launch_power_dbm: p,
                ..ImpairmentConfig::default()
            };
            run_link(&c, &fiber, &imp, 1 << 14, 6).unwrap().air.mi.mean
        })
        .collect();
    let peak = mi.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(peak > 0 && peak < mi.len() - 1, "optimum on the grid edge: {mi:?}");
    assert!(mi[..=peak].windows(2).all(|w| w[1] > w[0]), "{mi:?}");
    assert!(mi[peak..].windows(2).all(|w| w[1] < w[0]), "{mi:?}");
}

#[test]
fn high_power_switches_to_fallback_oversampling() {
    let c = build_pm16qam();
    let fiber = FiberConfig {
        steps_per_span: 100,
        ..FiberConfig::default()
    };
    let low = run_link(&c, &fiber, &ImpairmentConfig::noiseless(8.0), 1 << 13, 7).unwrap();
    let high = run_link(&c, &fiber, &ImpairmentConfig::noiseless(20.0), 1 << 13, 7).unwrap();
    assert_eq!(low.oversampling, 2);
    assert_eq!(high.oversampling, 4);
}

#[test]
fn seeds_control_every_random_draw() {
    let c = build_pm16qam();
    let fiber = FiberConfig {
        steps_per_span: 50,
        ..FiberConfig::default()
    };
    let imp = ImpairmentConfig::default();
    let a = run_link(&c, &fiber, &imp, 1 << 12, 9).unwrap();
    let b = run_link(&c, &fiber, &imp, 1 << 12, 9).unwrap();
    let other = run_link(&c, &fiber, &imp, 1 << 12, 10).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.record, other.record);
}
