use std::f64::consts::FRAC_PI_2;

use gss4d::constellation::{
    build_gss, deserialize, dof_count, norm_sq, papr, serialize, GssParameters, BOUND_EPS,
};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = (u32, usize)> {
    (5u32..=8).prop_flat_map(|m| {
        let max_log = m - 5;
        (Just(m), (0..=max_log).prop_map(|k| 1usize << k))
    })
}

fn params() -> impl Strategy<Value = GssParameters> {
    shape().prop_flat_map(|(m, t)| {
        let n = 1usize << (m - 5);
        let radius = BOUND_EPS..=1.0;
        let angle = BOUND_EPS..=(FRAC_PI_2 - BOUND_EPS);
        (
            proptest::collection::vec(radius, t),
            proptest::collection::vec([angle.clone(), angle.clone(), angle], n),
        )
            .prop_map(move |(radii, angles)| GssParameters::new(m, t, radii, angles).unwrap())
    })
}

fn find(points: &[[f64; 4]], x: &[f64; 4]) -> Option<usize> {
    points
        .iter()
        .position(|p| (0..4).all(|k| (p[k] - x[k]).abs() < 1e-9))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn labels_are_a_permutation(p in params()) {
        let c = build_gss(&p).unwrap();
        let mut labels = c.labels().to_vec();
        labels.sort_unstable();
        prop_assert_eq!(labels, (0..1u32 << p.m).collect::<Vec<_>>());
    }

    #[test]
    fn unit_energy_and_balanced_polarizations(p in params()) {
        let c = build_gss(&p).unwrap();
        prop_assert!((c.mean_energy() - 1.0).abs() < 1e-12);
        let (px, py) = c.polarization_powers();
        prop_assert!((px - py).abs() < 1e-12);
        prop_assert!(c.dimension_means().iter().all(|v| v.abs() < 1e-12));
        prop_assert!(c.is_uniform());
    }

    #[test]
    fn polarization_swap_flips_the_trailing_bit(p in params()) {
        let c = build_gss(&p).unwrap();
        let m = p.m as usize;
        for (j, x) in c.points().iter().enumerate() {
            let swapped = [x[2], x[3], x[0], x[1]];
            let i = find(c.points(), &swapped);
            prop_assert!(i.is_some(), "swap of point {} missing", j);
            let (a, b) = (c.labels()[j], c.labels()[i.unwrap()]);
            prop_assert_eq!((a ^ b) & 1, 1);
            let sign = |l: u32| l >> (m - 4);
            let s = sign(a);
            let expected = ((s & 0b0011) << 2) | ((s >> 2) & 0b0011);
            prop_assert_eq!(sign(b), expected);
        }
    }

    #[test]
    fn radius_ratios_fix_the_shells(p in params()) {
        let c = build_gss(&p).unwrap();
        let mut norms: Vec<f64> = c.points().iter().map(|x| norm_sq(x).sqrt()).collect();
        norms.sort_by(f64::total_cmp);
        norms.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let mut radii = p.radii.clone();
        radii.sort_by(f64::total_cmp);
        radii.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        prop_assert_eq!(norms.len(), radii.len());
        let scale = norms[0] / radii[0];
        for (n, r) in norms.iter().zip(&radii) {
            prop_assert!((n / r - scale).abs() < 1e-9 * scale);
        }
        let peak = radii.last().unwrap().powi(2);
        let mean: f64 = p.radii.iter().map(|r| r * r).sum::<f64>() / p.t as f64;
        prop_assert!((papr(&c) - peak / mean).abs() < 1e-9);
    }

    #[test]
    fn text_format_round_trips(p in params()) {
        let c = build_gss(&p).unwrap();
        let back = deserialize(&serialize(&c)).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn parameter_vector_round_trips(p in params()) {
        let v = p.to_vector();
        prop_assert_eq!(v.len(), dof_count(p.m, p.t).unwrap());
        let back = GssParameters::from_vector(p.m, p.t, &v).unwrap();
        prop_assert_eq!(&back, &p);
        let (lo, hi) = GssParameters::bounds(p.m, p.t).unwrap();
        prop_assert!(v.iter().zip(lo.iter().zip(&hi)).all(|(x, (l, h))| l <= x && x <= h));
    }

    #[test]
    fn out_of_box_vectors_are_rejected(p in params(), k in any::<prop::sample::Index>(), above in any::<bool>()) {
        let mut v = p.to_vector();
        let (lo, hi) = GssParameters::bounds(p.m, p.t).unwrap();
        let i = k.index(v.len());
        v[i] = if above { hi[i] + 1e-6 } else { lo[i] - 1e-6 };
        prop_assert!(GssParameters::from_vector(p.m, p.t, &v).is_err());
    }
}
