//! Bound-constrained generalized pattern search and the link objectives it
//! maximizes.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;
use thiserror::Error;

use crate::constellation::{build_gss, build_ps_pm16qam, Constellation, GssParameters, BOUND_EPS};
use crate::fiberlink::{run_link, FiberConfig, ImpairmentConfig};

/// Per-entry offset of the midpoint initializer.
pub const MIDPOINT_STAGGER: f64 = 1e-2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("invalid search options: {0}")]
    InvalidOptions(String),
    #[error("bounds and initial point must have equal, non-zero length")]
    Dimension,
    #[error("coordinate {0}: bounds must be finite with lower < upper")]
    Bounds(usize),
    #[error("coordinate {0} of the initial point lies outside the box")]
    InitOutOfBounds(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Rbmd,
    Mi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Poll step as a fraction of each coordinate's box width.
    pub initial_mesh: f64,
    pub expansion: f64,
    /// Upper limit of the mesh after expansion.
    pub max_mesh: f64,
    pub contraction: f64,
    pub mesh_tolerance: f64,
    /// Budget including the evaluation of the initial point.
    pub max_evaluations: usize,
    pub objective: Metric,
    pub seed: u64,
    /// Polls evaluated together before the acceptance decision. The best
    /// strictly improving poll of a batch is accepted and the rest of the
    /// poll set skipped; `usize::MAX` gives complete polling.
    pub poll_batch: usize,
    pub poll_order: PollOrder,
}

/// Order of the `2n` coordinate directions within one poll, numbered
/// `2i` for `+e_i` and `2i + 1` for `-e_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PollOrder {
    /// Always ascending.
    Fixed,
    /// The last successful direction first, then the rest ascending.
    SuccessFirst,
    /// Ascending, starting at the last successful direction and wrapping.
    Cyclic,
}

fn poll_sequence(order: PollOrder, dirs: usize, last: Option<usize>) -> Vec<usize> {
    match (order, last) {
        (PollOrder::Fixed, _) | (_, None) => (0..dirs).collect(),
        (PollOrder::SuccessFirst, Some(k)) => std::iter::once(k).chain((0..dirs).filter(|&d| d != k)).collect(),
        (PollOrder::Cyclic, Some(k)) => (0..dirs).map(|d| (k + d) % dirs).collect(),
    }
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            initial_mesh: 0.0625,
            expansion: 2.0,
            max_mesh: 0.0625,
            contraction: 0.5,
            mesh_tolerance: 1e-4,
            max_evaluations: 300,
            objective: Metric::Rbmd,
            seed: 1,
            poll_batch: 1,
            poll_order: PollOrder::Cyclic,
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: &str| Err(OptimizerError::InvalidOptions(m.into()));
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return bad("contraction must lie in (0, 1)");
        }
        if !(self.expansion > 1.0) {
            return bad("expansion must exceed 1");
        }
        if !(self.mesh_tolerance > 0.0) {
            return bad("mesh_tolerance must be positive");
        }
        if !(self.initial_mesh > 0.0 && self.initial_mesh <= self.max_mesh && self.max_mesh <= 1.0) {
            return bad("meshes must satisfy 0 < initial_mesh <= max_mesh <= 1");
        }
        if self.max_evaluations == 0 || self.poll_batch == 0 {
            return bad("max_evaluations and poll_batch must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub params: Vec<f64>,
    pub objective: f64,
    /// Mesh size at which the point was polled.
    pub mesh: f64,
    /// Whether the point became the incumbent.
    pub accepted: bool,
}

/// Every evaluation in order; the first entry is the initial point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchTrace {
    pub entries: Vec<TraceEntry>,
}

impl SearchTrace {
    /// Objective values of the successive incumbents.
    pub fn incumbents(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| e.accepted)
            .map(|e| e.objective)
            .collect()
    }

    pub fn evaluations(&self) -> usize {
        self.entries.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub trace: SearchTrace,
    pub final_mesh: f64,
}

/// Position of `x` on a 2^-40 grid of the box, used to recognize revisits.
fn cache_key(x: &[f64], lower: &[f64], upper: &[f64]) -> Vec<i64> {
    x.iter()
        .zip(lower.iter().zip(upper))
        .map(|(v, (l, u))| ((v - l) / (u - l) * CACHE_RESOLUTION).round() as i64)
        .collect()
}

const CACHE_RESOLUTION: f64 = (1u64 << 40) as f64;

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Maximizes `objective` over the box `[lower, upper]`.
///
/// Polls `x ± mesh * (upper_i - lower_i) e_i`, clamped to the box, in the
/// order given by [`PollOrder`]. Polls that clamp back onto the incumbent or
/// land on an already evaluated point are skipped: every evaluated point
/// scores at most the incumbent, so it can never be accepted. An improving batch moves the incumbent and expands the mesh (up
/// to `max_mesh`); an iteration without improvement contracts it. Stops when
/// the mesh drops below the tolerance or the budget is spent.
pub fn pattern_search<F>(
    objective: F,
    lower: &[f64],
    upper: &[f64],
    init: &[f64],
    opts: &SearchOptions,
) -> Result<SearchResult, OptimizerError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    opts.validate()?;
    let n = init.len();
    if n == 0 || lower.len() != n || upper.len() != n {
        return Err(OptimizerError::Dimension);
    }
    for i in 0..n {
        if !(lower[i].is_finite() && upper[i].is_finite() && lower[i] < upper[i]) {
            return Err(OptimizerError::Bounds(i));
        }
        if !(init[i] >= lower[i] && init[i] <= upper[i]) {
            return Err(OptimizerError::InitOutOfBounds(i));
        }
    }

    let mut x = init.to_vec();
    let mut fx = sanitize(objective(&x));
    let mut mesh = opts.initial_mesh;
    let mut trace = SearchTrace {
        entries: vec![TraceEntry {
            iteration: 0,
            params: x.clone(),
            objective: fx,
            mesh,
            accepted: true,
        }],
    };
    let mut iteration = 0;
    let mut last_success = None;
    let mut seen = HashSet::from([cache_key(&x, lower, upper)]);

    while mesh >= opts.mesh_tolerance && trace.evaluations() < opts.max_evaluations {
        iteration += 1;
        let polls: Vec<(usize, Vec<f64>)> = poll_sequence(opts.poll_order, 2 * n, last_success)
            .into_iter()
            .filter_map(|k| {
                let i = k / 2;
                let step = mesh * (upper[i] - lower[i]);
                let mut p = x.clone();
                p[i] = if k % 2 == 0 { x[i] + step } else { x[i] - step }.clamp(lower[i], upper[i]);
                (p[i] != x[i] && !seen.contains(&cache_key(&p, lower, upper))).then_some((k, p))
            })
            .collect();

        let mut improved = false;
        for batch in polls.chunks(opts.poll_batch) {
            let room = opts.max_evaluations - trace.evaluations();
            if room == 0 {
                break;
            }
            let batch = &batch[..batch.len().min(room)];
            let values: Vec<f64> = batch.par_iter().map(|(_, p)| sanitize(objective(p))).collect();
            seen.extend(batch.iter().map(|(_, p)| cache_key(p, lower, upper)));
            let mut winner: Option<usize> = None;
            for (b, &v) in values.iter().enumerate() {
                if v > winner.map_or(fx, |w| values[w]) {
                    winner = Some(b);
                }
            }
            for (b, ((_, p), &v)) in batch.iter().zip(&values).enumerate() {
                trace.entries.push(TraceEntry {
                    iteration,
                    params: p.clone(),
                    objective: v,
                    mesh,
                    accepted: winner == Some(b),
                });
            }
            if let Some(w) = winner {
                x = batch[w].1.clone();
                fx = values[w];
                last_success = Some(batch[w].0);
                improved = true;
                break;
            }
        }
        mesh = if improved {
            (mesh * opts.expansion).min(opts.max_mesh)
        } else {
            mesh * opts.contraction
        };
    }

    Ok(SearchResult {
        best: x,
        best_value: fx,
        trace,
        final_mesh: mesh,
    })
}

/// Link setup shared by every objective evaluation of one search. The
/// fixed seed gives all candidates the same symbol and noise draws.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkObjective {
    pub fiber: FiberConfig,
    pub impairments: ImpairmentConfig,
    pub symbols: usize,
    pub seed: u64,
    pub metric: Metric,
}

impl LinkObjective {
    /// Rate of `c` over the link, `-inf` if the link run fails.
    pub fn evaluate(&self, c: &Constellation) -> f64 {
        match run_link(c, &self.fiber, &self.impairments, self.symbols, self.seed) {
            Ok(run) => match self.metric {
                Metric::Rbmd => run.air.rbmd.mean,
                Metric::Mi => run.air.mi.mean,
            },
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// Objective of a flattened GSS parameter vector; invalid parameters or an
/// unbuildable constellation score `-inf`.
pub fn objective_for(m: u32, t: usize, v: &[f64], setup: &LinkObjective) -> f64 {
    GssParameters::from_vector(m, t, v)
        .and_then(|p| build_gss(&p))
        .map_or(f64::NEG_INFINITY, |c| setup.evaluate(&c))
}

/// Halfway point of the box, radii `(eps + 1) / 2` and angles `pi/4`, with
/// radius `i` and the `k`th flattened angle raised by `i` and `k` times
/// [`MIDPOINT_STAGGER`] so points on a shell stay distinct. The offset shrinks
/// when the largest one would leave the box.
pub fn midpoint_init(m: u32, t: usize) -> Result<GssParameters, crate::constellation::ConstellationError> {
    let n = 1usize << m.saturating_sub(5);
    let stagger = |count: usize, room: f64| MIDPOINT_STAGGER.min(room / count as f64);
    let dr = stagger(t, 0.5 * (1.0 - BOUND_EPS));
    let radii = (0..t).map(|i| 0.5 * (BOUND_EPS + 1.0) + i as f64 * dr).collect();
    let da = stagger(3 * n, FRAC_PI_4 - BOUND_EPS);
    let angles = (0..n)
        .map(|j| std::array::from_fn(|c| FRAC_PI_4 + (3 * j + c) as f64 * da))
        .collect();
    GssParameters::new(m, t, radii, angles)
}

/// Runs the pattern search over GSS parameters from the staggered midpoint.
pub fn optimize_gss(
    m: u32,
    t: usize,
    setup: &LinkObjective,
    opts: &SearchOptions,
) -> Result<(GssParameters, SearchResult), OptimizerError> {
    let bad = |e: crate::constellation::ConstellationError| OptimizerError::InvalidOptions(e.to_string());
    let init = midpoint_init(m, t).map_err(bad)?;
    let (lo, hi) = GssParameters::bounds(m, t).map_err(bad)?;
    let result = pattern_search(|v| objective_for(m, t, v, setup), &lo, &hi, &init.to_vector(), opts)?;
    let best = GssParameters::from_vector(m, t, &result.best).map_err(bad)?;
    Ok((best, result))
}

/// Allowed range of the PS-PM-16QAM inner-amplitude probability.
pub const P_LOW_RANGE: (f64, f64) = (1e-3, 1.0 - 1e-3);

/// One-dimensional search over the inner-amplitude probability of
/// PS-PM-16QAM, started from the uniform point 0.5.
pub fn optimize_ps(setup: &LinkObjective, opts: &SearchOptions) -> Result<(f64, SearchResult), OptimizerError> {
    let objective = |v: &[f64]| {
        build_ps_pm16qam(v[0]).map_or(f64::NEG_INFINITY, |c| setup.evaluate(&c))
    };
    let result = pattern_search(objective, &[P_LOW_RANGE.0], &[P_LOW_RANGE.1], &[0.5], opts)?;
    Ok((result.best[0], result))
}
