//! 4D constellations: the GSS construction, PM-16QAM baselines, structural
//! metrics and the text file format.

mod gss;
mod io;
mod qam;

pub use gss::{
    build_gss, dof_count, gss_first_orthant, orthant_symmetry, unconstrained_dof, xy_symmetry,
    GssParameters, LabeledPoints, BOUND_EPS,
};
pub use io::{deserialize, serialize};
pub use qam::{build_pm16qam, build_ps_pm16qam, PAM4_GRAY};

use thiserror::Error;

/// A point in R^4: (x-pol I, x-pol Q, y-pol I, y-pol Q).
pub type Point4 = [f64; 4];

/// Two points closer than this in every coordinate are treated as equal.
pub const DUPLICATE_TOL: f64 = 1e-9;

const PMF_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstellationError {
    #[error("bits per symbol m={0} is not supported (need 5 <= m <= 16)")]
    InvalidBits(u32),
    #[error("shell count t={t} must be a power of two no larger than {max}")]
    InvalidShellCount { t: usize, max: usize },
    #[error("{what}[{index}] = {value} is outside [{lo}, {hi}]")]
    OutOfBounds {
        what: &'static str,
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("label {0:#b} appears more than once")]
    DuplicateLabel(u32),
    #[error("label {label:#b} does not fit in {m} bits")]
    LabelRange { label: u32, m: u32 },
    #[error("pmf is invalid: {0}")]
    InvalidPmf(String),
    #[error("point {0} has a non-positive coordinate")]
    NonPositiveCoordinate(usize),
    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An M-point, m-bit labeled 4D constellation with a symbol pmf.
///
/// Immutable once built; every constructor validates the invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    name: String,
    m: u32,
    shells: Option<usize>,
    points: Vec<Point4>,
    labels: Vec<u32>,
    pmf: Vec<f64>,
}

impl Constellation {
    pub fn new(
        name: impl Into<String>,
        m: u32,
        points: Vec<Point4>,
        labels: Vec<u32>,
        pmf: Vec<f64>,
    ) -> Result<Self, ConstellationError> {
        if !(1..=16).contains(&m) {
            return Err(ConstellationError::InvalidBits(m));
        }
        let size = 1usize << m;
        for len in [points.len(), labels.len(), pmf.len()] {
            if len != size {
                return Err(ConstellationError::LengthMismatch {
                    expected: size,
                    got: len,
                });
            }
        }
        let mut seen = vec![false; size];
        for &l in &labels {
            if l as usize >= size {
                return Err(ConstellationError::LabelRange { label: l, m });
            }
            if std::mem::replace(&mut seen[l as usize], true) {
                return Err(ConstellationError::DuplicateLabel(l));
            }
        }
        if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(ConstellationError::InvalidPmf(
                "negative or non-finite entry".into(),
            ));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(ConstellationError::InvalidPmf(format!("sums to {total}")));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ConstellationError::InvalidPmf(
                "non-finite coordinate".into(),
            ));
        }
        if let Some((a, b)) = find_duplicate(&points) {
            return Err(ConstellationError::DuplicatePoint(a, b));
        }
        Ok(Self {
            name: name.into(),
            m,
            shells: None,
            points,
            labels,
            pmf,
        })
    }

    pub(crate) fn with_shells(mut self, t: Option<usize>) -> Self {
        self.shells = t;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bits(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Shell count for GSS constellations, `None` otherwise.
    pub fn shells(&self) -> Option<usize> {
        self.shells
    }

    pub fn points(&self) -> &[Point4] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Bit `k` (0-based, so `k = 0` is b1) of the label of point `j`.
    #[inline]
    pub fn label_bit(&self, j: usize, k: usize) -> u8 {
        ((self.labels[j] >> (self.m as usize - 1 - k)) & 1) as u8
    }

    pub fn is_uniform(&self) -> bool {
        let p0 = self.pmf[0];
        self.pmf.iter().all(|&p| p == p0)
    }

    /// E[||X||^2] under the pmf.
    pub fn mean_energy(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.pmf)
            .map(|(x, p)| p * norm_sq(x))
            .sum()
    }

    /// Mean power in (x1, x2) and (x3, x4).
    pub fn polarization_powers(&self) -> (f64, f64) {
        self.points
            .iter()
            .zip(&self.pmf)
            .fold((0.0, 0.0), |(px, py), (x, p)| {
                (
                    px + p * (x[0] * x[0] + x[1] * x[1]),
                    py + p * (x[2] * x[2] + x[3] * x[3]),
                )
            })
    }

    /// Per-dimension mean under the pmf.
    pub fn dimension_means(&self) -> [f64; 4] {
        let mut mean = [0.0; 4];
        for (x, p) in self.points.iter().zip(&self.pmf) {
            for d in 0..4 {
                mean[d] += p * x[d];
            }
        }
        mean
    }

    /// Entropy of the symbol pmf in bits.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.pmf)
    }

    /// Returns a copy scaled to unit mean energy under its pmf.
    pub fn normalized(&self) -> Self {
        let scale = 1.0 / self.mean_energy().sqrt();
        let mut out = self.clone();
        for x in &mut out.points {
            for v in x.iter_mut() {
                *v *= scale;
            }
        }
        out
    }

    /// Same geometry and labels with a different pmf.
    pub fn with_pmf(&self, pmf: Vec<f64>) -> Result<Self, ConstellationError> {
        Constellation::new(
            self.name.clone(),
            self.m,
            self.points.clone(),
            self.labels.clone(),
            pmf,
        )
        .map(|c| c.with_shells(self.shells))
    }

    /// Index of the point carrying `label`.
    pub fn index_of_label(&self, label: u32) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }
}

/// Peak-to-average power ratio over 4D symbols.
pub fn papr(c: &Constellation) -> f64 {
    let peak = c.points().iter().map(norm_sq).fold(0.0, f64::max);
    peak / c.mean_energy()
}

#[inline]
pub fn norm_sq(x: &Point4) -> f64 {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]
}

pub(crate) fn entropy_bits(pmf: &[f64]) -> f64 {
    -pmf.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

pub(crate) fn same_point(a: &Point4, b: &Point4) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).abs() < DUPLICATE_TOL)
}

fn find_duplicate(points: &[Point4]) -> Option<(usize, usize)> {
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if same_point(&points[i], &points[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(points: Vec<Point4>, labels: Vec<u32>, pmf: Vec<f64>) -> Result<Constellation, ConstellationError> {
        Constellation::new("tiny", 1, points, labels, pmf)
    }

    #[test]
    fn rejects_duplicate_points() {
        let p = [1.0, 0.0, 0.0, 0.0];
        let err = tiny(vec![p, p], vec![0, 1], vec![0.5, 0.5]).unwrap_err();
        assert_eq!(err, ConstellationError::DuplicatePoint(0, 1));
    }

    #[test]
    fn rejects_bad_pmf_and_labels() {
        let a = [1.0, 0.0, 0.0, 0.0];
        let b = [-1.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            tiny(vec![a, b], vec![0, 1], vec![0.5, 0.4]),
            Err(ConstellationError::InvalidPmf(_))
        ));
        assert_eq!(
            tiny(vec![a, b], vec![1, 1], vec![0.5, 0.5]).unwrap_err(),
            ConstellationError::DuplicateLabel(1)
        );
        assert!(matches!(
            tiny(vec![a, b], vec![0, 2], vec![0.5, 0.5]),
            Err(ConstellationError::LabelRange { .. })
        ));
    }

    #[test]
    fn normalization_and_entropy() {
        let a = [3.0, 0.0, 0.0, 0.0];
        let b = [-3.0, 0.0, 0.0, 0.0];
        let c = tiny(vec![a, b], vec![0, 1], vec![0.5, 0.5]).unwrap().normalized();
        assert!((c.mean_energy() - 1.0).abs() < 1e-15);
        assert_eq!(c.entropy(), 1.0);
        assert_eq!(papr(&c), 1.0);
    }
}
