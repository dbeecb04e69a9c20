//! `key = value` run configuration. Blank lines and lines starting with `#`
//! are ignored; unknown or repeated keys are rejected.

use std::collections::BTreeSet;
use std::path::PathBuf;

use gss4d::constellation::{build_gss, build_pm16qam, build_ps_pm16qam, deserialize, Constellation, GssParameters};
use gss4d::fiberlink::{FiberConfig, ImpairmentConfig};
use gss4d::optimizer::{midpoint_init, Metric, PollOrder, SearchOptions};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Pm16qam,
    PsPm16qam { p_low: f64 },
    Gss { m: u32, t: usize, params: Option<Vec<f64>> },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    pub fiber: FiberConfig,
    pub impairments: ImpairmentConfig,
    pub distances_km: Vec<f64>,
    pub launch_powers_dbm: Vec<f64>,
    pub symbols: usize,
    pub seed: u64,
    pub metric: Metric,
    pub chase_q: usize,
    pub search: SearchOptions,
    /// Symbol count for re-evaluating an optimized constellation.
    pub final_symbols: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            source: Source::Pm16qam,
            fiber: FiberConfig::default(),
            impairments: ImpairmentConfig::default(),
            distances_km: vec![160.0],
            launch_powers_dbm: parse_list("8:18:0.5").expect("valid default grid"),
            symbols: 1 << 16,
            seed: 1,
            metric: Metric::Rbmd,
            chase_q: 4,
            search: SearchOptions::default(),
            final_symbols: 1 << 16,
        }
    }
}

pub const KEYS: &[&str] = &[
    "constellation",
    "constellation_file",
    "p_low",
    "m",
    "t",
    "gss_params",
    "distances_km",
    "launch_powers_dbm",
    "alpha_db_per_km",
    "beta2_ps2_per_km",
    "gamma_per_w_km",
    "steps_per_span",
    "symbol_rate_gbd",
    "oversampling",
    "rrc_rolloff",
    "discard_symbols",
    "tx_osnr_db",
    "rx_noise_power_dbm",
    "rx_min_input_dbm",
    "symbols",
    "seed",
    "metric",
    "chase_q",
    "max_evaluations",
    "initial_mesh",
    "max_mesh",
    "expansion",
    "contraction",
    "mesh_tolerance",
    "poll_batch",
    "poll_order",
    "final_symbols",
];

fn field_err(key: &str, value: &str, what: &str) -> CliError {
    CliError::config(format!("{key}: {value:?} is not {what}"))
}

fn real(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| field_err(key, v, "a finite number"))
}

/// Integer, also accepting `2^k`.
fn count(key: &str, v: &str) -> Result<usize, CliError> {
    if let Some(exp) = v.strip_prefix("2^") {
        return exp
            .parse::<u32>()
            .ok()
            .and_then(|e| 1usize.checked_shl(e))
            .ok_or_else(|| field_err(key, v, "a count"));
    }
    v.parse().map_err(|_| field_err(key, v, "a count"))
}

fn optional_real(key: &str, v: &str) -> Result<Option<f64>, CliError> {
    if v == "off" {
        Ok(None)
    } else {
        real(key, v).map(Some)
    }
}

/// Comma-separated values, or an inclusive `start:stop:step` range.
pub fn parse_list(v: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    let out = if parts.len() == 3 {
        let [a, b, s] = [parts[0], parts[1], parts[2]].map(|p| p.parse::<f64>().ok());
        let (a, b, s) = (a?, b?, s?);
        if !(s > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
            return None;
        }
        let n = ((b - a) / s + 1e-9).floor() as usize;
        (0..=n).map(|i| ((a + i as f64 * s) * 1e9).round() / 1e9).collect()
    } else if parts.len() == 1 {
        v.split(',')
            .map(|x| x.trim().parse::<f64>().ok().filter(|y| y.is_finite()))
            .collect::<Option<Vec<_>>>()?
    } else {
        return None;
    };
    (!out.is_empty()).then_some(out)
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    parse_list(v).ok_or_else(|| field_err(key, v, "a non-empty list or start:stop:step range"))
}

pub fn parse_metric(v: &str) -> Result<Metric, CliError> {
    match v {
        "rbmd" => Ok(Metric::Rbmd),
        "mi" => Ok(Metric::Mi),
        _ => Err(field_err("metric", v, "one of mi, rbmd")),
    }
}

fn parse_poll_order(v: &str) -> Result<PollOrder, CliError> {
    match v {
        "fixed" => Ok(PollOrder::Fixed),
        "success-first" => Ok(PollOrder::SuccessFirst),
        "cyclic" => Ok(PollOrder::Cyclic),
        _ => Err(field_err("poll_order", v, "one of fixed, success-first, cyclic")),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeSet::new();
        let mut kind = None;
        let mut file = None;
        let mut p_low = None;
        let mut m = 8;
        let mut t = 4;
        let mut params = None;

        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected key = value", no + 1)))?;
            let (key, v) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(CliError::config(format!("line {}: unknown key {key:?}", no + 1)));
            }
            if !seen.insert(key.to_string()) {
                return Err(CliError::config(format!("line {}: key {key:?} repeated", no + 1)));
            }
            let f = &mut cfg.fiber;
            let imp = &mut cfg.impairments;
            let s = &mut cfg.search;
            match key {
                "constellation" => kind = Some(v.to_string()),
                "constellation_file" => file = Some(PathBuf::from(v)),
                "p_low" => p_low = Some(real(key, v)?),
                "m" => m = count(key, v)? as u32,
                "t" => t = count(key, v)?,
                "gss_params" => {
                    params = Some(
                        v.split(',')
                            .map(|x| real(key, x.trim()))
                            .collect::<Result<Vec<_>, _>>()?,
                    )
                }
                "distances_km" => cfg.distances_km = list(key, v)?,
                "launch_powers_dbm" => cfg.launch_powers_dbm = list(key, v)?,
                "alpha_db_per_km" => f.alpha_db_per_km = real(key, v)?,
                "beta2_ps2_per_km" => f.beta2_ps2_per_km = real(key, v)?,
                "gamma_per_w_km" => f.gamma_per_w_km = real(key, v)?,
                "steps_per_span" => f.steps_per_span = count(key, v)?,
                "symbol_rate_gbd" => f.symbol_rate_gbd = real(key, v)?,
                "oversampling" => f.oversampling = count(key, v)?,
                "rrc_rolloff" => f.rrc_rolloff = real(key, v)?,
                "discard_symbols" => f.discard_symbols = count(key, v)?,
                "tx_osnr_db" => imp.tx_osnr_db = optional_real(key, v)?,
                "rx_noise_power_dbm" => imp.rx_noise_power_dbm = optional_real(key, v)?,
                "rx_min_input_dbm" => imp.rx_min_input_dbm = real(key, v)?,
                "symbols" => cfg.symbols = count(key, v)?,
                "seed" => cfg.seed = v.parse().map_err(|_| field_err(key, v, "an unsigned integer"))?,
                "metric" => cfg.metric = parse_metric(v)?,
                "chase_q" => cfg.chase_q = count(key, v)?,
                "max_evaluations" => s.max_evaluations = count(key, v)?,
                "initial_mesh" => s.initial_mesh = real(key, v)?,
                "max_mesh" => s.max_mesh = real(key, v)?,
                "expansion" => s.expansion = real(key, v)?,
                "contraction" => s.contraction = real(key, v)?,
                "mesh_tolerance" => s.mesh_tolerance = real(key, v)?,
                "poll_batch" => s.poll_batch = count(key, v)?,
                "poll_order" => s.poll_order = parse_poll_order(v)?,
                "final_symbols" => cfg.final_symbols = count(key, v)?,
                _ => unreachable!("key list and match arms agree"),
            }
        }

        cfg.source = match kind.as_deref().unwrap_or("pm16qam") {
            "pm16qam" => Source::Pm16qam,
            "ps-pm16qam" => Source::PsPm16qam {
                p_low: p_low.unwrap_or(0.5),
            },
            "gss" => Source::Gss { m, t, params },
            "file" => {
                let path = file.ok_or_else(|| CliError::config("constellation_file: required when constellation = file"))?;
                if !path.is_file() {
                    return Err(CliError::config(format!("constellation_file: {} does not exist", path.display())));
                }
                Source::File(path)
            }
            other => return Err(field_err("constellation", other, "one of pm16qam, ps-pm16qam, gss, file")),
        };
        for (key, used) in [
            ("p_low", matches!(cfg.source, Source::PsPm16qam { .. })),
            ("gss_params", matches!(cfg.source, Source::Gss { .. })),
            ("constellation_file", matches!(cfg.source, Source::File(_))),
        ] {
            if seen.contains(key) && !used {
                return Err(CliError::config(format!("{key}: not used by this constellation source")));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.fiber.validate()?;
        if self.distances_km.iter().any(|&d| d < 0.0) {
            return Err(CliError::config("distances_km: distances must be non-negative"));
        }
        if self.symbols <= self.fiber.discard_symbols || self.final_symbols <= self.fiber.discard_symbols {
            return Err(CliError::config("symbols: must exceed discard_symbols"));
        }
        if self.chase_q > gss4d::fec::MAX_CHASE_Q {
            return Err(CliError::config(format!("chase_q: at most {}", gss4d::fec::MAX_CHASE_Q)));
        }
        self.search.validate()?;
        Ok(())
    }

    pub fn constellation(&self) -> Result<Constellation, CliError> {
        Ok(match &self.source {
            Source::Pm16qam => build_pm16qam(),
            Source::PsPm16qam { p_low } => build_ps_pm16qam(*p_low)?,
            Source::Gss { m, t, params } => build_gss(&self.gss_parameters(*m, *t, params.as_deref())?)?,
            Source::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                deserialize(&text)?
            }
        })
    }

    fn gss_parameters(&self, m: u32, t: usize, params: Option<&[f64]>) -> Result<GssParameters, CliError> {
        Ok(match params {
            Some(v) => GssParameters::from_vector(m, t, v)?,
            None => midpoint_init(m, t)?,
        })
    }

    pub fn fiber_at(&self, distance_km: f64) -> FiberConfig {
        FiberConfig {
            span_length_km: distance_km,
            ..self.fiber.clone()
        }
    }

    pub fn impairments_at(&self, launch_power_dbm: f64) -> ImpairmentConfig {
        ImpairmentConfig {
            launch_power_dbm,
            ..self.impairments.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::parse("# comment\n\nseed = 7\nsymbols = 2^12\ntx_osnr_db = off\nlaunch_powers_dbm = 10, 12.5\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.symbols, 4096);
        assert_eq!(cfg.impairments.tx_osnr_db, None);
        assert_eq!(cfg.launch_powers_dbm, vec![10.0, 12.5]);
        assert_eq!(cfg.source, Source::Pm16qam);
        assert_eq!(RunConfig::default().launch_powers_dbm.len(), 21);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_list("8:9:0.5").unwrap(), vec![8.0, 8.5, 9.0]);
        assert_eq!(parse_list("0:0.3:0.1").unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
        assert!(parse_list("1:0:1").is_none());
        assert!(parse_list("1,x").is_none());
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        for text in [
            "sed = 1",
            "seed = -1",
            "seed = 1\nseed = 2",
            "metric = gmi",
            "distances_km = ",
            "constellation = gss\np_low = 0.2",
            "constellation = file",
            "symbols = 512",
            "contraction = 2",
            "noequals",
        ] {
            let err = RunConfig::parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
        let msg = RunConfig::parse("sed = 1").unwrap_err().to_string();
        assert!(msg.contains("sed"), "{msg}");
    }

    #[test]
    fn gss_source_builds() {
        let cfg = RunConfig::parse("constellation = gss\nm = 8\nt = 4").unwrap();
        let c = cfg.constellation().unwrap();
        assert_eq!(c.size(), 256);
        assert_eq!(c.shells(), Some(4));
    }
}
