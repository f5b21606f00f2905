mod common;

use proptest::prelude::*;
use rand::Rng;
use rhobench::crystal::{
    fft_forward, fft_inverse, gvectors_within, image_distances, reciprocal_lattice, Cell, DensityField, Grid, Mat3, Vec3,
};
use std::f64::consts::PI;

#[test]
fn reciprocal_lattice_inverts_random_cells() {
    let mut rng = common::rng(1);
    for _ in 0..200 {
        let cell = common::random_cell(&mut rng, (2.0, 12.0), 0.4);
        let a = *cell.lattice();
        let b = reciprocal_lattice(&a).unwrap();
        let err = (b.transpose() * a - Mat3::identity()).abs().max();
        assert!(err <= 1e-14, "{err:e}");
    }
}

#[test]
fn reciprocal_lattice_trivial_cases() {
    let id = reciprocal_lattice(&Mat3::identity()).unwrap();
    assert_eq!(id, Mat3::identity());
    let b = reciprocal_lattice(&(Mat3::identity() * 4.0)).unwrap();
    assert!((b - Mat3::identity() * 0.25).abs().max() < 1e-16);
    assert!(reciprocal_lattice(&Mat3::from_row_slice(&[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0])).is_err());
}

#[test]
fn miller_sphere_of_unit_reciprocal_cell() {
    let gs = gvectors_within(&Cell::cubic(2.0 * PI).unwrap(), 2.0);
    assert_eq!(gs.len(), 33);
    let mut shells = [0usize; 5];
    for g in &gs {
        let [h, k, l] = g.miller;
        shells[(h * h + k * k + l * l) as usize] += 1;
        assert!((g.kinetic() - 0.5 * (h * h + k * k + l * l) as f64).abs() < 1e-13);
    }
    assert_eq!(shells, [1, 6, 12, 8, 6]);
}

#[test]
fn image_enumeration_matches_brute_force() {
    let mut rng = common::rng(2);
    for _ in 0..50 {
        let cell = common::random_cell(&mut rng, (5.0, 6.0), 0.1);
        let a = common::random_point(&mut rng, &cell);
        let b = common::random_point(&mut rng, &cell);
        let radius = rng.random_range(3.0..4.8);
        let mut brute = Vec::new();
        for i in -2..=2 {
            for j in -2..=2 {
                for k in -2..=2 {
                    let img = b + cell.vector(0) * i as f64 + cell.vector(1) * j as f64 + cell.vector(2) * k as f64;
                    let d = (img - a).norm();
                    if d <= radius {
                        brute.push(d);
                    }
                }
            }
        }
        brute.sort_by(f64::total_cmp);
        let got = image_distances(&cell, &a, &b, radius);
        assert_eq!(got.len(), brute.len());
        for (g, w) in got.iter().zip(&brute) {
            assert!((g - w).abs() < 1e-12);
        }
    }
}

#[test]
fn wrapped_image_in_cubic_cell() {
    let cell = Cell::cubic(10.0).unwrap();
    let d = image_distances(&cell, &Vec3::zeros(), &Vec3::new(9.0, 0.0, 0.0), 4.0);
    assert_eq!(d.len(), 1);
    assert!((d[0] - 1.0).abs() < 1e-14);
}

#[test]
fn fft_round_trip_of_random_field() {
    let mut rng = common::rng(3);
    let cell = common::random_cell(&mut rng, (4.0, 7.0), 0.3);
    let grid = Grid::new(cell, [12, 15, 10]).unwrap();
    let values: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(0.0..3.0)).collect();
    let field = DensityField::new(grid, values).unwrap();
    let back = fft_inverse(&fft_forward(&field));
    let scale = field.max();
    let err = field
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-12 * scale, "{err:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gvectors_sorted_closed_under_negation(seed in 0u64..10_000, cutoff in 0.0f64..6.0) {
        let mut rng = common::rng(seed);
        let cell = common::random_cell(&mut rng, (3.0, 7.0), 0.3);
        let gs = gvectors_within(&cell, cutoff);
        prop_assert!(gs.iter().any(|g| g.miller == [0, 0, 0]));
        prop_assert!(gs.windows(2).all(|w| w[0].kinetic() <= w[1].kinetic()));
        let set: std::collections::HashSet<_> = gs.iter().map(|g| g.miller).collect();
        for g in &gs {
            prop_assert!(set.contains(&[-g.miller[0], -g.miller[1], -g.miller[2]]));
            for i in 0..3 {
                prop_assert!((cell.vector(i).dot(&g.g) - 2.0 * PI * g.miller[i] as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn real_field_spectrum_is_hermitian(seed in 0u64..10_000) {
        let mut rng = common::rng(seed);
        let grid = Grid::new(common::random_cell(&mut rng, (3.0, 6.0), 0.2), [6, 5, 8]).unwrap();
        let values = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let spec = fft_forward(&DensityField::new(grid.clone(), values).unwrap());
        for idx in 0..grid.len() {
            let m = grid.frequency(idx);
            let m_neg = [-m[0], -m[1], -m[2]];
            prop_assert!((spec.get(m) - spec.get(m_neg).conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn lattice_translation_leaves_image_distances(seed in 0u64..10_000) {
        let mut rng = common::rng(seed);
        let cell = common::random_cell(&mut rng, (3.0, 6.0), 0.2);
        let a = common::random_point(&mut rng, &cell);
        let b = common::random_point(&mut rng, &cell);
        let shift = cell.vector(0) * 2.0 - cell.vector(2);
        let d0 = image_distances(&cell, &a, &b, 5.0);
        let d1 = image_distances(&cell, &a, &(b + shift), 5.0);
        prop_assert_eq!(d0.len(), d1.len());
        for (x, y) in d0.iter().zip(&d1) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
