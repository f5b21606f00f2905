mod common;

use num_complex::Complex64;
use rand::Rng;
use rhobench::crystal::{fft_forward, fft_inverse, gvectors_within, Cell, DensityField, Grid, Spectrum};
use rhobench::densio::{
    decode_realspace, decode_reciprocal, encode_realspace, encode_reciprocal, project_density, write_projection,
    DensioError,
};
use std::f64::consts::PI;

const HEADER: usize = 4 + 12 + 72 + 8 + 8;
const RECORD: usize = 28;

fn unit_reciprocal_grid() -> Grid {
    Grid::new(Cell::cubic(2.0 * PI).unwrap(), [6, 6, 6]).unwrap()
}

/// Random real field band-limited to the ½|G|² ≤ ecut sphere.
fn band_limited(grid: &Grid, ecut: f64, seed: u64) -> DensityField {
    let mut rng = common::rng(seed);
    let mut spec = Spectrum::zeros(grid.clone());
    for g in gvectors_within(grid.cell(), ecut) {
        let m = g.miller;
        let neg = [-m[0], -m[1], -m[2]];
        if m == [0, 0, 0] {
            spec.set(m, Complex64::new(0.5, 0.0));
        } else if m > neg {
            let c = Complex64::new(rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01));
            spec.set(m, c);
            spec.set(neg, c.conj());
        }
    }
    fft_inverse(&spec)
}

fn record_count(bytes: &[u8]) -> usize {
    u64::from_le_bytes(bytes[HEADER - 8..HEADER].try_into().unwrap()) as usize
}

#[test]
fn unit_reciprocal_cell_writes_33_records() {
    let grid = unit_reciprocal_grid();
    let bytes = encode_reciprocal(&band_limited(&grid, 2.0, 1), 2.0).unwrap();
    assert_eq!(record_count(&bytes), 33);
    assert_eq!(bytes.len(), HEADER + 33 * RECORD);
}

#[test]
fn uniform_field_is_dc_with_zero_records() {
    let grid = unit_reciprocal_grid();
    let c = 0.125;
    let bytes = encode_reciprocal(&DensityField::uniform(grid.clone(), c), 2.0).unwrap();
    assert_eq!(record_count(&bytes), 33);
    let first = &bytes[HEADER..HEADER + RECORD];
    assert_eq!(&first[..12], &[0u8; 12]);
    assert_eq!(f64::from_le_bytes(first[12..20].try_into().unwrap()), c);
    assert_eq!(f64::from_le_bytes(first[20..28].try_into().unwrap()), 0.0);
    for k in 1..33 {
        let rec = &bytes[HEADER + k * RECORD..HEADER + (k + 1) * RECORD];
        assert!(f64::from_le_bytes(rec[12..20].try_into().unwrap()).abs() <= 1e-15);
    }
    let back = decode_reciprocal(&bytes, &grid).unwrap();
    assert!(back.values().iter().all(|v| (v - c).abs() < 1e-15));
}

#[test]
fn write_read_write_is_byte_identical() {
    let mut rng = common::rng(2);
    let cell = common::random_cell(&mut rng, (4.0, 6.0), 0.25);
    let grid = Grid::for_cutoff(&cell, 16.0);
    let values = (0..grid.len()).map(|_| rng.random_range(0.0..1.0)).collect();
    let field = DensityField::new(grid.clone(), values).unwrap();
    let once = encode_reciprocal(&field, 16.0).unwrap();
    let twice = encode_reciprocal(&field, 16.0).unwrap();
    assert_eq!(once, twice);
    let again = encode_reciprocal(&decode_reciprocal(&once, &grid).unwrap(), 16.0).unwrap();
    assert_eq!(once, again);
}

#[test]
fn band_limited_field_round_trips_to_1e12() {
    let mut rng = common::rng(3);
    let cell = common::random_cell(&mut rng, (4.0, 6.0), 0.25);
    let grid = Grid::for_cutoff(&cell, 8.0);
    let field = band_limited(&grid, 8.0, 4);
    let back = decode_reciprocal(&encode_reciprocal(&field, 8.0).unwrap(), &grid).unwrap();
    let worst = field.values().iter().zip(back.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-12 * field.max(), "{worst:e}");
}

#[test]
fn round_trip_is_a_low_pass_filter() {
    let mut rng = common::rng(5);
    let grid = Grid::new(Cell::cubic(5.0).unwrap(), [12, 12, 12]).unwrap();
    let values = (0..grid.len()).map(|_| rng.random_range(0.0..1.0)).collect();
    let field = DensityField::new(grid.clone(), values).unwrap();
    let back = decode_reciprocal(&encode_reciprocal(&field, 6.0).unwrap(), &grid).unwrap();
    let (a, b) = (fft_forward(&field), fft_forward(&back));
    for idx in 0..grid.len() {
        let m = grid.frequency(idx);
        let inside = 0.5 * grid.cell().gvector(m).norm_squared() <= 6.0;
        let target = if inside { a.coeffs()[idx] } else { Complex64::default() };
        assert!((b.coeffs()[idx] - target).norm() <= 1e-12);
    }
}

#[test]
fn corrupt_reciprocal_files_are_rejected() {
    let grid = unit_reciprocal_grid();
    let good = encode_reciprocal(&band_limited(&grid, 2.0, 6), 2.0).unwrap();

    let mut magic = good.clone();
    magic[0] = b'X';
    assert!(matches!(decode_reciprocal(&magic, &grid), Err(DensioError::Parse(_))));

    assert!(matches!(decode_reciprocal(&good[..good.len() - 5], &grid), Err(DensioError::Parse(_))));
    let mut trailing = good.clone();
    trailing.extend_from_slice(&[0u8; 3]);
    assert!(matches!(decode_reciprocal(&trailing, &grid), Err(DensioError::Parse(_))));

    let mut skew = good.clone();
    let re = HEADER + 5 * RECORD + 12;
    let v = f64::from_le_bytes(skew[re..re + 8].try_into().unwrap()) + 0.05;
    skew[re..re + 8].copy_from_slice(&v.to_le_bytes());
    assert!(matches!(decode_reciprocal(&skew, &grid), Err(DensioError::Corrupt(_))));

    let mut outside = good.clone();
    let m = HEADER + 7 * RECORD;
    outside[m..m + 4].copy_from_slice(&9i32.to_le_bytes());
    assert!(matches!(decode_reciprocal(&outside, &grid), Err(DensioError::Corrupt(_))));

    let mut dup = good.clone();
    let (a, b) = (HEADER + RECORD, HEADER + 2 * RECORD);
    let first: Vec<u8> = dup[a..a + 12].to_vec();
    dup[b..b + 12].copy_from_slice(&first);
    assert!(matches!(decode_reciprocal(&dup, &grid), Err(DensioError::Corrupt(_))));

    let mut zero_dims = good.clone();
    zero_dims[4..8].copy_from_slice(&0u32.to_le_bytes());
    assert!(matches!(decode_reciprocal(&zero_dims, &grid), Err(DensioError::Parse(_))));

    let small = Grid::new(grid.cell().clone(), [3, 3, 3]).unwrap();
    assert!(matches!(decode_reciprocal(&good, &small), Err(DensioError::Codec(_))));
    assert!(encode_reciprocal(&DensityField::uniform(small, 1.0), 2.0).is_err());
}

#[test]
fn realspace_round_trip_and_errors() {
    let mut rng = common::rng(7);
    let grid = Grid::new(common::random_cell(&mut rng, (3.0, 5.0), 0.2), [5, 7, 4]).unwrap();
    let values: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let field = DensityField::new(grid, values).unwrap();
    let bytes = encode_realspace(&field);
    let back = decode_realspace(&bytes).unwrap();
    assert_eq!(back.values(), field.values());
    assert_eq!(back.grid(), field.grid());

    assert!(matches!(decode_realspace(&bytes[..88]), Err(DensioError::Parse(_))));
    assert!(matches!(decode_realspace(&bytes[..bytes.len() - 8]), Err(DensioError::Parse(_))));
    let mut zero = bytes.clone();
    zero[8..12].copy_from_slice(&0u32.to_le_bytes());
    assert!(matches!(decode_realspace(&zero), Err(DensioError::Parse(_))));
    let mut other = bytes.clone();
    other[..4].copy_from_slice(b"RHO1");
    assert!(decode_realspace(&other).is_err());
}

#[test]
fn projections_are_linear_and_conserve_charge() {
    let grid = Grid::new(Cell::cubic(5.0).unwrap(), [10, 10, 10]).unwrap();
    let uniform = project_density(&DensityField::uniform(grid.clone(), 0.3));
    assert!(uniform.values.iter().all(|v| (v - 3.0).abs() < 1e-12));

    let mut spike = vec![0.0; grid.len()];
    spike[grid.index([3, 6, 2])] = 1.0;
    let p = project_density(&DensityField::new(grid.clone(), spike).unwrap());
    let bright: Vec<_> = (0..p.n * p.n).filter(|&k| p.values[k] > 0.0).collect();
    assert_eq!(bright, vec![3 + p.n * 6]);

    let f = band_limited(&grid, 4.0, 8);
    let g = band_limited(&grid, 4.0, 9);
    let sum = DensityField::new(grid.clone(), f.values().iter().zip(g.values()).map(|(a, b)| 2.0 * a + b).collect()).unwrap();
    let (pf, pg, ps) = (project_density(&f), project_density(&g), project_density(&sum));
    for k in 0..ps.values.len() {
        assert!((ps.values[k] - 2.0 * pf.values[k] - pg.values[k]).abs() < 1e-12);
    }

    let odd = Grid::new(Cell::from_rows([[5.0, 0.0, 0.0], [0.0, 6.0, 0.0], [0.0, 0.0, 4.0]]).unwrap(), [10, 12, 8]).unwrap();
    let h = band_limited(&odd, 3.0, 10);
    let ph = project_density(&h);
    let measure = odd.cell().volume() / (ph.n * ph.n * ph.n) as f64;
    let total: f64 = ph.values.iter().sum::<f64>() * measure;
    assert!((total - h.integral()).abs() <= 1e-6 * h.integral());

    let dir = tempfile::tempdir().unwrap();
    let (csv, png) = write_projection(&ph, &dir.path().join("proj")).unwrap();
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), ph.n);
    assert!(std::fs::metadata(png).unwrap().len() > 0);
}
