use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use gss4d::constellation::{
    build_gss, build_ps_pm16qam, dof_count, papr, serialize, Constellation, GssParameters,
};
use gss4d::fec::{postfec_ber, DecoderMode, HammingCode};
use gss4d::fiberlink::{min_launch_power, run_link};
use gss4d::optimizer::{midpoint_init, objective_for, pattern_search, LinkObjective, Metric, SearchResult, P_LOW_RANGE};

use crate::config::{RunConfig, Source};
use crate::error::CliError;
use crate::output::{sweep_columns, SweepRow};

const POWER_MATCH_TOL: f64 = 1e-9;

fn metric_value(row: &SweepRow, metric: Metric) -> f64 {
    match metric {
        Metric::Rbmd => row.rbmd,
        Metric::Mi => row.mi,
    }
}

/// One link run at (distance, power) with both decoders on its LLRs.
pub fn evaluate_point(cfg: &RunConfig, c: &Constellation, distance_km: f64, power_dbm: f64) -> Result<SweepRow, CliError> {
    let run = run_link(c, &cfg.fiber_at(distance_km), &cfg.impairments_at(power_dbm), cfg.symbols, cfg.seed)?;
    let code = HammingCode::new();
    let hd = postfec_ber(&run.frame, &code, DecoderMode::Hard, cfg.seed)?;
    let sd = postfec_ber(&run.frame, &code, DecoderMode::Chase { q: cfg.chase_q }, cfg.seed)?;
    Ok(SweepRow {
        distance_km,
        launch_power_dbm: power_dbm,
        mi: run.air.mi.mean,
        rbmd: run.air.rbmd.mean,
        bitwise_mi: run.air.bitwise_mi.iter().map(|e| e.mean).collect(),
        papr: papr(c),
        sigma2: run.air.sigma2,
        pre_fec_ber: hd.pre_fec_ber,
        post_fec_ber_hd: hd.post_fec_ber,
        post_fec_ber_sd: sd.post_fec_ber,
        optimal: false,
        pushed_above_optimal: false,
        pass_hd: hd.pass,
        pass_sd: sd.pass,
        low_confidence: hd.low_confidence,
    })
}

/// Rows of one distance in ascending power order, with the grid optimum
/// flagged. When the optimum lies below the minimum launch power for the
/// receiver input limit, the row at that minimum (evaluated if it is not on
/// the grid) is flagged as pushed above optimal.
fn distance_rows(cfg: &RunConfig, c: &Constellation, distance_km: f64, mut rows: Vec<SweepRow>) -> Result<Vec<SweepRow>, CliError> {
    let best = (0..rows.len())
        .reduce(|a, b| {
            if metric_value(&rows[b], cfg.metric) > metric_value(&rows[a], cfg.metric) {
                b
            } else {
                a
            }
        })
        .expect("non-empty power grid");
    rows[best].optimal = true;
    let p_min = min_launch_power(distance_km, cfg.impairments.rx_min_input_dbm, cfg.fiber.alpha_db_per_km);
    if rows[best].launch_power_dbm < p_min - POWER_MATCH_TOL {
        match rows
            .iter()
            .position(|r| (r.launch_power_dbm - p_min).abs() <= POWER_MATCH_TOL)
        {
            Some(i) => rows[i].pushed_above_optimal = true,
            None => {
                let mut extra = evaluate_point(cfg, c, distance_km, p_min)?;
                extra.pushed_above_optimal = true;
                rows.push(extra);
                rows.sort_by(|a, b| a.launch_power_dbm.total_cmp(&b.launch_power_dbm));
            }
        }
    }
    Ok(rows)
}

/// Evaluates the full (distance, power) grid; rows come back in grid order
/// no matter how the points were scheduled.
pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let c = cfg.constellation()?;
    let mut powers = cfg.launch_powers_dbm.clone();
    powers.sort_by(f64::total_cmp);
    powers.dedup();
    let grid: Vec<(f64, f64)> = cfg
        .distances_km
        .iter()
        .flat_map(|&d| powers.iter().map(move |&p| (d, p)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(d, p)| evaluate_point(cfg, &c, d, p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::with_capacity(rows.len());
    for (chunk, &d) in rows.chunks(powers.len()).zip(&cfg.distances_km) {
        out.extend(distance_rows(cfg, &c, d, chunk.to_vec())?);
    }
    Ok(out)
}

fn table(rows: &[SweepRow]) -> String {
    let bits = rows.first().map_or(8, |r| r.bitwise_mi.len());
    let mut s = sweep_columns(bits);
    for r in rows {
        s.push_str(&r.csv());
    }
    s
}

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<String, CliError> {
    Ok(table(&sweep(cfg)?))
}

/// One row per distance at its operating power: the pushed row where the
/// receiver limit applies, the grid optimum otherwise.
pub fn cmd_fec_ber(cfg: &RunConfig) -> Result<String, CliError> {
    let rows = sweep(cfg)?;
    let mut picked = Vec::new();
    for d in &cfg.distances_km {
        let at_d: Vec<&SweepRow> = rows.iter().filter(|r| r.distance_km == *d).collect();
        let row = at_d
            .iter()
            .find(|r| r.pushed_above_optimal)
            .or_else(|| at_d.iter().find(|r| r.optimal))
            .expect("every distance has an optimum");
        picked.push((*row).clone());
    }
    Ok(table(&picked))
}

#[derive(Debug, Serialize)]
pub struct ExportSummary {
    pub name: String,
    pub bits: u32,
    pub shells: Option<usize>,
    pub dof: Option<usize>,
    pub papr: f64,
    pub mean_energy: f64,
    pub power_x: f64,
    pub power_y: f64,
    pub entropy: f64,
}

pub fn summarize(c: &Constellation) -> ExportSummary {
    let (px, py) = c.polarization_powers();
    ExportSummary {
        name: c.name().to_string(),
        bits: c.bits(),
        shells: c.shells(),
        dof: c.shells().and_then(|t| dof_count(c.bits(), t).ok()),
        papr: papr(c),
        mean_energy: c.mean_energy(),
        power_x: px,
        power_y: py,
        entropy: c.entropy(),
    }
}

pub fn cmd_export(cfg: &RunConfig) -> Result<(String, ExportSummary), CliError> {
    let c = cfg.constellation()?;
    Ok((serialize(&c), summarize(&c)))
}

#[derive(Debug, Serialize)]
pub struct OptimizeSummary {
    pub evaluations: usize,
    pub best_objective: f64,
    pub initial_objective: f64,
    /// Objective of the result re-evaluated with `final_symbols` symbols.
    pub final_objective: f64,
    pub final_mesh: f64,
    pub params: Vec<f64>,
}

pub struct Optimized {
    pub constellation: String,
    pub trace_csv: String,
    pub summary: OptimizeSummary,
}

fn single(values: &[f64], key: &str) -> Result<f64, CliError> {
    match values {
        [v] => Ok(*v),
        _ => Err(CliError::config(format!("{key}: optimize needs exactly one value"))),
    }
}

pub fn trace_csv(result: &SearchResult) -> String {
    let dim = result.best.len();
    let mut s = String::from("iteration,evaluation,objective,mesh,accepted");
    for i in 0..dim {
        let _ = write!(s, ",x{i}");
    }
    s.push('\n');
    for (n, e) in result.trace.entries.iter().enumerate() {
        let _ = write!(s, "{},{},{:.17e},{:.6e},{}", e.iteration, n, e.objective, e.mesh, e.accepted as u8);
        for p in &e.params {
            let _ = write!(s, ",{p:.17e}");
        }
        s.push('\n');
    }
    s
}

pub fn cmd_optimize(cfg: &RunConfig) -> Result<Optimized, CliError> {
    let distance = single(&cfg.distances_km, "distances_km")?;
    let power = single(&cfg.launch_powers_dbm, "launch_powers_dbm")?;
    let mut setup = LinkObjective {
        fiber: cfg.fiber_at(distance),
        impairments: cfg.impairments_at(power),
        symbols: cfg.symbols,
        seed: cfg.seed,
        metric: cfg.metric,
    };
    let opts = cfg.search.clone();

    let (result, build): (SearchResult, Box<dyn Fn(&[f64]) -> Result<Constellation, CliError>>) = match &cfg.source {
        Source::Gss { m, t, params } => {
            let (m, t) = (*m, *t);
            let init = match params {
                Some(v) => GssParameters::from_vector(m, t, v)?,
                None => midpoint_init(m, t)?,
            };
            let (lo, hi) = GssParameters::bounds(m, t)?;
            let r = pattern_search(|v| objective_for(m, t, v, &setup), &lo, &hi, &init.to_vector(), &opts)?;
            (r, Box::new(move |v| Ok(build_gss(&GssParameters::from_vector(m, t, v)?)?)))
        }
        Source::PsPm16qam { p_low } => {
            if !(P_LOW_RANGE.0..=P_LOW_RANGE.1).contains(p_low) {
                return Err(CliError::config(format!(
                    "p_low: initial value must lie in [{}, {}]",
                    P_LOW_RANGE.0, P_LOW_RANGE.1
                )));
            }
            let f = |v: &[f64]| build_ps_pm16qam(v[0]).map_or(f64::NEG_INFINITY, |c| setup.evaluate(&c));
            let r = pattern_search(f, &[P_LOW_RANGE.0], &[P_LOW_RANGE.1], &[*p_low], &opts)?;
            (r, Box::new(|v| Ok(build_ps_pm16qam(v[0])?)))
        }
        _ => return Err(CliError::config("constellation: optimize supports gss and ps-pm16qam")),
    };
    if !result.best_value.is_finite() {
        return Err(CliError::Numerical("no candidate produced a finite objective".into()));
    }
    let best = build(&result.best)?;
    setup.symbols = cfg.final_symbols;
    let final_objective = setup.evaluate(&best);
    if !final_objective.is_finite() {
        return Err(CliError::Numerical("re-evaluation of the optimum failed".into()));
    }
    Ok(Optimized {
        constellation: serialize(&best),
        trace_csv: trace_csv(&result),
        summary: OptimizeSummary {
            evaluations: result.trace.evaluations(),
            best_objective: result.best_value,
            initial_objective: result.trace.entries[0].objective,
            final_objective,
            final_mesh: result.final_mesh,
            params: result.best.clone(),
        },
    })
}
