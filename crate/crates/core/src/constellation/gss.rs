use std::f64::consts::FRAC_PI_2;

use super::{same_point, Constellation, ConstellationError, Point4};

/// Margin keeping radii in [eps, 1] and angles in [eps, pi/2 - eps], so that
/// first-orthant points never touch a coordinate hyperplane.
pub const BOUND_EPS: f64 = 1e-3;

/// Decision vector of a GSS constellation: `t` shell radii and one
/// (theta, phi, omega) triple per first-orthant point.
#[derive(Debug, Clone, PartialEq)]
pub struct GssParameters {
    pub m: u32,
    pub t: usize,
    pub radii: Vec<f64>,
    pub angles: Vec<[f64; 3]>,
}

/// Points with their labels, index-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoints {
    pub points: Vec<Point4>,
    pub labels: Vec<u32>,
}

/// Number of free parameters of a GSS constellation: 3 * 2^(m-5) + t.
pub fn dof_count(m: u32, t: usize) -> Result<usize, ConstellationError> {
    validate_shape(m, t)?;
    Ok(3 * first_orthant_size(m) + t)
}

/// Degrees of freedom of an unconstrained 4D constellation, 4 * 2^m.
pub fn unconstrained_dof(m: u32) -> usize {
    4 << m
}

fn first_orthant_size(m: u32) -> usize {
    1 << (m - 5)
}

fn validate_shape(m: u32, t: usize) -> Result<(), ConstellationError> {
    if !(5..=16).contains(&m) {
        return Err(ConstellationError::InvalidBits(m));
    }
    let max = first_orthant_size(m);
    if t == 0 || !t.is_power_of_two() || t > max {
        return Err(ConstellationError::InvalidShellCount { t, max });
    }
    Ok(())
}

fn check_bound(
    what: &'static str,
    index: usize,
    value: f64,
    lo: f64,
    hi: f64,
) -> Result<(), ConstellationError> {
    // NaN fails both comparisons and is rejected here too.
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(ConstellationError::OutOfBounds {
            what,
            index,
            value,
            lo,
            hi,
        })
    }
}

impl GssParameters {
    pub fn new(
        m: u32,
        t: usize,
        radii: Vec<f64>,
        angles: Vec<[f64; 3]>,
    ) -> Result<Self, ConstellationError> {
        let p = Self { m, t, radii, angles };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ConstellationError> {
        validate_shape(self.m, self.t)?;
        if self.radii.len() != self.t {
            return Err(ConstellationError::LengthMismatch {
                expected: self.t,
                got: self.radii.len(),
            });
        }
        let n = first_orthant_size(self.m);
        if self.angles.len() != n {
            return Err(ConstellationError::LengthMismatch {
                expected: n,
                got: self.angles.len(),
            });
        }
        for (i, &r) in self.radii.iter().enumerate() {
            check_bound("radius", i, r, BOUND_EPS, 1.0)?;
        }
        for (j, a) in self.angles.iter().enumerate() {
            for &v in a {
                check_bound("angle", j, v, BOUND_EPS, FRAC_PI_2 - BOUND_EPS)?;
            }
        }
        Ok(())
    }

    /// Flattened layout: radii first, then theta, phi, omega per point.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = self.radii.clone();
        v.extend(self.angles.iter().flatten());
        v
    }

    pub fn from_vector(m: u32, t: usize, v: &[f64]) -> Result<Self, ConstellationError> {
        let dof = dof_count(m, t)?;
        if v.len() != dof {
            return Err(ConstellationError::LengthMismatch {
                expected: dof,
                got: v.len(),
            });
        }
        let radii = v[..t].to_vec();
        let angles = v[t..].chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(m, t, radii, angles)
    }

    /// Lower and upper box bounds matching the flattened layout.
    pub fn bounds(m: u32, t: usize) -> Result<(Vec<f64>, Vec<f64>), ConstellationError> {
        let dof = dof_count(m, t)?;
        let lo = vec![BOUND_EPS; dof];
        let mut hi = vec![1.0; t];
        hi.resize(dof, FRAC_PI_2 - BOUND_EPS);
        Ok((lo, hi))
    }

    pub fn points_per_shell(&self) -> usize {
        first_orthant_size(self.m) / self.t
    }

    fn shell_bits(&self) -> u32 {
        self.t.trailing_zeros()
    }
}

fn spherical_to_cartesian(r: f64, [theta, phi, omega]: [f64; 3]) -> Point4 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (so, co) = omega.sin_cos();
    [r * ct, r * st * cp, r * st * sp * co, r * st * sp * so]
}

/// Maps the parameters to the 2^(m-5) first-orthant points.
///
/// Angle triple `j` sits on shell `j / (2^(m-5) / t)`. Its (m-5)-bit label
/// holds the shell index in the top p = log2(t) bits followed by the rank of
/// the point's theta among the points of that shell.
pub fn gss_first_orthant(params: &GssParameters) -> Result<LabeledPoints, ConstellationError> {
    params.validate()?;
    let per_shell = params.points_per_shell();
    let pos_bits = params.m - 5 - params.shell_bits();
    let n = params.angles.len();
    let mut points = Vec::with_capacity(n);
    let mut labels = vec![0u32; n];
    for (j, &a) in params.angles.iter().enumerate() {
        points.push(spherical_to_cartesian(params.radii[j / per_shell], a));
    }
    for shell in 0..params.t {
        let first = shell * per_shell;
        let mut order: Vec<usize> = (first..first + per_shell).collect();
        order.sort_by(|&a, &b| params.angles[a][0].total_cmp(&params.angles[b][0]));
        for (rank, &j) in order.iter().enumerate() {
            labels[j] = ((shell as u32) << pos_bits) | rank as u32;
        }
    }
    Ok(LabeledPoints { points, labels })
}

/// Doubles the point set by swapping the two polarizations; the swapped copy
/// gets a trailing 1 bit, the original a trailing 0.
pub fn xy_symmetry(input: &LabeledPoints) -> Result<LabeledPoints, ConstellationError> {
    let n = input.points.len();
    let mut points = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for (x, &l) in input.points.iter().zip(&input.labels) {
        points.push(*x);
        labels.push(l << 1);
    }
    for (i, (x, &l)) in input.points.iter().zip(&input.labels).enumerate() {
        let swapped = [x[2], x[3], x[0], x[1]];
        if same_point(x, &swapped) {
            return Err(ConstellationError::DuplicatePoint(i, i + n));
        }
        points.push(swapped);
        labels.push((l << 1) | 1);
    }
    Ok(LabeledPoints { points, labels })
}

/// Mirrors first-orthant points into all 16 orthants. Output row
/// `i + n * o` is point `i` with coordinate `k` negated when bit `k` of the
/// orthant index `o` is set; those four sign bits become b1..b4 of the label.
pub fn orthant_symmetry(
    input: &LabeledPoints,
    m: u32,
    name: &str,
) -> Result<Constellation, ConstellationError> {
    let n = input.points.len();
    if n << 4 != 1usize << m {
        return Err(ConstellationError::LengthMismatch {
            expected: (1usize << m) >> 4,
            got: n,
        });
    }
    if let Some(i) = input
        .points
        .iter()
        .position(|x| x.iter().any(|&v| !(v > 0.0)))
    {
        return Err(ConstellationError::NonPositiveCoordinate(i));
    }
    let mut points = Vec::with_capacity(n << 4);
    let mut labels = Vec::with_capacity(n << 4);
    for orthant in 0..16u32 {
        let mut sign_label = 0;
        let mut signs = [1.0; 4];
        for k in 0..4 {
            if (orthant >> k) & 1 == 1 {
                signs[k] = -1.0;
                sign_label |= 1 << (m - 1 - k as u32);
            }
        }
        for (x, &l) in input.points.iter().zip(&input.labels) {
            points.push([x[0] * signs[0], x[1] * signs[1], x[2] * signs[2], x[3] * signs[3]]);
            labels.push(sign_label | l);
        }
    }
    let size = points.len();
    Constellation::new(name, m, points, labels, vec![1.0 / size as f64; size])
}

/// First orthant, X-Y symmetry, orthant symmetry, unit-power normalization.
pub fn build_gss(params: &GssParameters) -> Result<Constellation, ConstellationError> {
    let first = gss_first_orthant(params)?;
    let doubled = xy_symmetry(&first)?;
    let name = format!("4D-{}-GSS-{}", 1u32 << params.m, params.t);
    Ok(orthant_symmetry(&doubled, params.m, &name)?
        .normalized()
        .with_shells(Some(params.t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{norm_sq, papr};
    use std::f64::consts::FRAC_PI_4;

    fn uniform_params(t: usize, r: f64) -> GssParameters {
        let angles = (0..8)
            .map(|j| {
                let s = 0.1 + 0.15 * j as f64;
                [s, 1.2 - 0.1 * j as f64, 0.3 + 0.05 * j as f64]
            })
            .collect();
        GssParameters::new(8, t, vec![r; t], angles).unwrap()
    }

    #[test]
    fn dof_values() {
        assert_eq!(dof_count(8, 4).unwrap(), 28);
        assert_eq!(dof_count(8, 8).unwrap(), 32);
        assert_eq!(unconstrained_dof(8), 1024);
        assert!(dof_count(8, 3).is_err());
        assert!(dof_count(8, 16).is_err());
        assert!(dof_count(4, 1).is_err());
    }

    #[test]
    fn spherical_mapping_at_quarter_pi() {
        let x = spherical_to_cartesian(1.0, [FRAC_PI_4; 3]);
        let s = FRAC_PI_4.sin();
        let c = FRAC_PI_4.cos();
        let want = [c, s * c, s * s * c, s * s * s];
        for d in 0..4 {
            assert!((x[d] - want[d]).abs() < 1e-15);
        }
        assert!((x[0] - 0.70710678).abs() < 1e-8);
        assert!((x[1] - 0.5).abs() < 1e-12);
        assert!((x[2] - 0.35355339).abs() < 1e-8);
        assert!((x[3] - 0.35355339).abs() < 1e-8);
        assert!((norm_sq(&x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equal_radii_put_every_point_on_one_sphere() {
        let p = uniform_params(4, 0.7);
        let first = gss_first_orthant(&p).unwrap();
        assert_eq!(first.points.len(), 8);
        for x in &first.points {
            assert!((norm_sq(x).sqrt() - 0.7).abs() < 1e-14);
            assert!(x.iter().all(|&v| v > 0.0));
        }
        let mut shells = [0; 4];
        for l in &first.labels {
            shells[(l >> 1) as usize] += 1;
        }
        assert_eq!(shells, [2; 4]);
    }

    #[test]
    fn shell_label_rank_follows_theta() {
        let mut p = uniform_params(4, 0.5);
        // Swap theta order inside shell 0.
        p.angles[0][0] = 1.0;
        p.angles[1][0] = 0.2;
        let first = gss_first_orthant(&p).unwrap();
        assert_eq!(first.labels[0], 0b001);
        assert_eq!(first.labels[1], 0b000);
        assert_eq!(first.labels[6], 0b110);
    }

    #[test]
    fn xy_swap_pairs_and_fixed_point() {
        let input = LabeledPoints {
            points: vec![[0.1, 0.2, 0.3, 0.4]],
            labels: vec![0b101],
        };
        let out = xy_symmetry(&input).unwrap();
        assert_eq!(out.points, vec![[0.1, 0.2, 0.3, 0.4], [0.3, 0.4, 0.1, 0.2]]);
        assert_eq!(out.labels, vec![0b1010, 0b1011]);
        let again = xy_symmetry(&LabeledPoints {
            points: vec![out.points[1]],
            labels: vec![0],
        })
        .unwrap();
        assert_eq!(again.points[1], input.points[0]);

        let fixed = LabeledPoints {
            points: vec![[0.3, 0.4, 0.3, 0.4]],
            labels: vec![0],
        };
        assert_eq!(
            xy_symmetry(&fixed).unwrap_err(),
            ConstellationError::DuplicatePoint(0, 1)
        );
    }

    #[test]
    fn orthant_rows_follow_mirroring_matrices() {
        let first = gss_first_orthant(&uniform_params(4, 0.8)).unwrap();
        let doubled = xy_symmetry(&first).unwrap();
        let c = orthant_symmetry(&doubled, 8, "t").unwrap();
        assert_eq!(c.size(), 256);
        let x = doubled.points[3];
        // j = 2: l = [1,0,0,0]
        assert_eq!(c.points()[3 + 16], [-x[0], x[1], x[2], x[3]]);
        assert_eq!(c.labels()[3 + 16], 0b1000_0000 | doubled.labels[3]);
        // j = 16: l = [1,1,1,1]
        assert_eq!(c.points()[3 + 240], [-x[0], -x[1], -x[2], -x[3]]);
        assert_eq!(c.labels()[3 + 240] >> 4, 0b1111);
        for d in c.dimension_means() {
            assert!(d.abs() < 1e-15);
        }
    }

    #[test]
    fn orthant_symmetry_rejects_zero_coordinate() {
        let mut doubled = xy_symmetry(&gss_first_orthant(&uniform_params(2, 0.8)).unwrap()).unwrap();
        doubled.points[5][2] = 0.0;
        assert_eq!(
            orthant_symmetry(&doubled, 8, "t").unwrap_err(),
            ConstellationError::NonPositiveCoordinate(5)
        );
    }

    #[test]
    fn single_shell_is_constant_modulus() {
        let p = uniform_params(1, 0.9);
        let c = build_gss(&p).unwrap();
        assert!((papr(&c) - 1.0).abs() < 1e-12);
        assert!((c.mean_energy() - 1.0).abs() < 1e-12);
        assert_eq!(c.shells(), Some(1));
        assert_eq!(build_gss(&p).unwrap(), c);
    }

    #[test]
    fn parameter_validation() {
        let p = uniform_params(4, 0.5);
        let mut bad = p.clone();
        bad.radii[2] = 0.0;
        assert!(matches!(bad.validate(), Err(ConstellationError::OutOfBounds { what: "radius", .. })));
        let mut bad = p.clone();
        bad.angles[1][2] = FRAC_PI_2;
        assert!(matches!(bad.validate(), Err(ConstellationError::OutOfBounds { what: "angle", .. })));
        let mut bad = p.clone();
        bad.angles[1][0] = f64::NAN;
        assert!(bad.validate().is_err());
        assert!(GssParameters::new(8, 4, vec![0.5; 3], p.angles.clone()).is_err());

        let v = p.to_vector();
        assert_eq!(v.len(), 28);
        assert_eq!(GssParameters::from_vector(8, 4, &v).unwrap(), p);
        let (lo, hi) = GssParameters::bounds(8, 4).unwrap();
        assert_eq!(lo.len(), 28);
        assert_eq!(hi[3], 1.0);
        assert_eq!(hi[4], FRAC_PI_2 - BOUND_EPS);
    }
}
