use super::{Constellation, ConstellationError, Point4};

/// Binary reflected Gray labels of PAM-4 as (sign bit, amplitude bit), for
/// levels -3, -1, +1, +3. The sign bit is 1 for negative levels.
pub const PAM4_GRAY: [(u32, u32, f64); 4] = [(1, 1, -3.0), (1, 0, -1.0), (0, 0, 1.0), (0, 1, 3.0)];

fn level(sign: u32, amp: u32) -> f64 {
    let magnitude = if amp == 1 { 3.0 } else { 1.0 };
    if sign == 1 {
        -magnitude
    } else {
        magnitude
    }
}

/// Row `j` carries label `j`; bits b1..b4 are the per-dimension signs and
/// b5..b8 the per-dimension amplitude bits.
fn pm16qam_geometry() -> (Vec<Point4>, Vec<u32>) {
    let mut points = Vec::with_capacity(256);
    for label in 0..256u32 {
        let mut x = [0.0; 4];
        for (d, v) in x.iter_mut().enumerate() {
            let sign = (label >> (7 - d)) & 1;
            let amp = (label >> (3 - d)) & 1;
            *v = level(sign, amp);
        }
        points.push(x);
    }
    (points, (0..256).collect())
}

/// Uniform PM-16QAM, {+-1, +-3}^4 scaled to unit mean energy.
pub fn build_pm16qam() -> Constellation {
    let (points, labels) = pm16qam_geometry();
    Constellation::new("PM-16QAM", 8, points, labels, vec![1.0 / 256.0; 256])
        .expect("PM-16QAM geometry is valid")
        .normalized()
}

/// PM-16QAM with each real dimension drawn independently: magnitude 1 with
/// probability `p_low`, magnitude 3 otherwise, signs uniform.
pub fn build_ps_pm16qam(p_low: f64) -> Result<Constellation, ConstellationError> {
    if !(p_low > 0.0 && p_low < 1.0) {
        return Err(ConstellationError::InvalidProbability(p_low));
    }
    let (points, labels) = pm16qam_geometry();
    let pmf: Vec<f64> = points
        .iter()
        .map(|x| {
            x.iter()
                .map(|v| if v.abs() == 1.0 { p_low / 2.0 } else { (1.0 - p_low) / 2.0 })
                .product()
        })
        .collect();
    Ok(Constellation::new("PS-PM-16QAM", 8, points, labels, pmf)?.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{norm_sq, papr};

    #[test]
    fn energy_before_scaling() {
        let (points, _) = pm16qam_geometry();
        let mean = points.iter().map(norm_sq).sum::<f64>() / 256.0;
        let max = points.iter().map(norm_sq).fold(0.0, f64::max);
        assert_eq!(mean, 20.0);
        assert_eq!(max, 36.0);
    }

    #[test]
    fn papr_is_nine_fifths() {
        let c = build_pm16qam();
        assert!((papr(&c) - 36.0 / 20.0).abs() < 1e-12);
        assert!((c.mean_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        let c = build_pm16qam();
        let step = 2.0 / 20f64.sqrt();
        for i in 0..256 {
            for j in 0..256 {
                let a = c.points()[i];
                let b = c.points()[j];
                let diff: Vec<usize> = (0..4).filter(|&d| (a[d] - b[d]).abs() > 1e-12).collect();
                if diff.len() == 1 && ((a[diff[0]] - b[diff[0]]).abs() - step).abs() < 1e-12 {
                    assert_eq!((c.labels()[i] ^ c.labels()[j]).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn gray_table_consistent_with_levels() {
        for (s, a, v) in PAM4_GRAY {
            assert_eq!(level(s, a), v);
        }
    }

    #[test]
    fn shaped_half_is_uniform() {
        let ps = build_ps_pm16qam(0.5).unwrap();
        let u = build_pm16qam();
        assert!(ps.is_uniform());
        for (a, b) in ps.points().iter().zip(u.points()) {
            for d in 0..4 {
                assert!((a[d] - b[d]).abs() < 1e-15);
            }
        }
        assert!((papr(&ps) - papr(&u)).abs() < 1e-12);
    }

    #[test]
    fn shaped_marginals_by_enumeration() {
        for p_low in [0.1, 0.37, 0.8, 0.999] {
            let c = build_ps_pm16qam(p_low).unwrap();
            assert!((c.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((c.mean_energy() - 1.0).abs() < 1e-12);
            let inner = c.points().iter().map(|x| x[0].abs()).fold(f64::INFINITY, f64::min);
            for d in 0..4 {
                let mass_low: f64 = c
                    .points()
                    .iter()
                    .zip(c.pmf())
                    .filter(|(x, _)| (x[d].abs() - inner).abs() < 1e-12)
                    .map(|(_, p)| p)
                    .sum();
                let mass_pos: f64 = c
                    .points()
                    .iter()
                    .zip(c.pmf())
                    .filter(|(x, _)| x[d] > 0.0)
                    .map(|(_, p)| p)
                    .sum();
                assert!((mass_low - p_low).abs() < 1e-12);
                assert!((mass_pos - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shaping_concentrates_and_raises_papr() {
        let c = build_ps_pm16qam(0.999).unwrap();
        let min_norm = c.points().iter().map(norm_sq).fold(f64::INFINITY, f64::min);
        let inner16: f64 = c
            .points()
            .iter()
            .zip(c.pmf())
            .filter(|(x, _)| (norm_sq(x) - min_norm).abs() < 1e-12)
            .map(|(_, p)| p)
            .sum();
        assert!(inner16 > 0.99);
        assert!(papr(&build_ps_pm16qam(0.6).unwrap()) > 1.80);
        assert!(build_ps_pm16qam(0.0).is_err());
        assert!(build_ps_pm16qam(1.0).is_err());
        assert!(build_ps_pm16qam(f64::NAN).is_err());
    }
}
