use std::fmt::Write as _;

use serde::Serialize;

/// Version of the sweep CSV column layout.
pub const CSV_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Header<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub csv_version: u32,
    pub command: &'a str,
    pub seed: u64,
    pub metric: &'a str,
    pub workers: usize,
    /// The configuration file as given.
    pub config: &'a str,
}

impl Header<'_> {
    pub fn line(&self) -> String {
        format!("# {}\n", serde_json::to_string(self).expect("plain struct serializes"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub distance_km: f64,
    pub launch_power_dbm: f64,
    pub mi: f64,
    pub rbmd: f64,
    pub bitwise_mi: Vec<f64>,
    pub papr: f64,
    pub sigma2: f64,
    pub pre_fec_ber: f64,
    pub post_fec_ber_hd: f64,
    pub post_fec_ber_sd: f64,
    pub optimal: bool,
    pub pushed_above_optimal: bool,
    pub pass_hd: bool,
    pub pass_sd: bool,
    pub low_confidence: bool,
}

pub fn sweep_columns(bits: usize) -> String {
    let mut cols = vec!["distance_km".to_string(), "launch_power_dbm".into(), "mi".into(), "rbmd".into()];
    cols.extend((1..=bits).map(|k| format!("bitwise_mi_b{k}")));
    cols.extend(
        [
            "papr",
            "sigma2",
            "pre_fec_ber",
            "post_fec_ber_hd",
            "post_fec_ber_sd",
            "optimal",
            "pushed_above_optimal",
            "pass_hd",
            "pass_sd",
            "low_confidence",
        ]
        .map(String::from),
    );
    cols.join(",") + "\n"
}

impl SweepRow {
    pub fn csv(&self) -> String {
        let mut s = format!("{},{},{:.6},{:.6}", self.distance_km, self.launch_power_dbm, self.mi, self.rbmd);
        for b in &self.bitwise_mi {
            let _ = write!(s, ",{b:.6}");
        }
        let flag = |b: bool| if b { 1 } else { 0 };
        let _ = writeln!(
            s,
            ",{:.6},{:.6e},{:.6e},{:.6e},{:.6e},{},{},{},{},{}",
            self.papr,
            self.sigma2,
            self.pre_fec_ber,
            self.post_fec_ber_hd,
            self.post_fec_ber_sd,
            flag(self.optimal),
            flag(self.pushed_above_optimal),
            flag(self.pass_hd),
            flag(self.pass_sd),
            flag(self.low_confidence),
        );
        s
    }
}
