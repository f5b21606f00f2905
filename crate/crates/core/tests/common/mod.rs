//! Independent oracles shared by the integration tests and the acceptance
//! runner. Nothing here calls into the code it checks beyond plain data
//! accessors.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhobench::crystal::{Atom, Cell, Species, Structure, Vec3};
use rhobench::initdens::{AtomicDensityTable, RadialDensity};
use rhobench::predictor::DescriptorSpec;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Right-handed lower-triangular cell with diagonal in `side` and
/// off-diagonals up to `shear` times the smaller side.
pub fn random_cell(rng: &mut ChaCha8Rng, side: (f64, f64), shear: f64) -> Cell {
    let mut d = || rng.random_range(side.0..side.1);
    let (a, b, c) = (d(), d(), d());
    let s = shear * side.0;
    let mut o = || rng.random_range(-s..=s);
    Cell::from_rows([[a, 0.0, 0.0], [o(), b, 0.0], [o(), o(), c]]).expect("right-handed cell")
}

pub fn random_point(rng: &mut ChaCha8Rng, cell: &Cell) -> Vec3 {
    let f = Vec3::from_fn(|_, _| rng.random::<f64>());
    cell.to_cartesian(&f)
}

/// Structure with `n_atoms` atoms drawn from `species` (cycled), at random
/// positions inside `cell`. Every species carries z = 2.
pub fn random_structure(rng: &mut ChaCha8Rng, cell: Cell, n_atoms: usize, n_species: usize) -> Structure {
    let species: Vec<Species> = (0..n_species as u32)
        .map(|i| Species::new(i, 2.0, 0.6 + 0.1 * i as f64).unwrap())
        .collect();
    let atoms = (0..n_atoms)
        .map(|k| Atom {
            position: random_point(rng, &cell),
            species: (k % n_species) as u32,
        })
        .collect();
    Structure::from_cell(cell, atoms, species).unwrap()
}

/// One atom of species 0 (z = 2, width `sigma`) at `pos` in a cubic cell.
pub fn single_atom(a: f64, sigma: f64, pos: Vec3) -> Structure {
    Structure::from_cell(
        Cell::cubic(a).unwrap(),
        vec![Atom { position: pos, species: 0 }],
        vec![Species::new(0, 2.0, sigma).unwrap()],
    )
    .unwrap()
}

/// Features by enumerating the 5×5×5 block of images around every atom.
/// Valid when every plane spacing is at least r_cut.
pub fn brute_features(structure: &Structure, point: &Vec3, spec: &DescriptorSpec) -> Vec<f64> {
    let cell = structure.cell();
    let mut out = vec![0.0; spec.dim()];
    for atom in structure.atoms() {
        let Some(slot) = spec.species_list.iter().position(|&s| s == atom.species) else {
            continue;
        };
        for i in -2..=2 {
            for j in -2..=2 {
                for k in -2..=2 {
                    let image = atom.position
                        + cell.vector(0) * i as f64
                        + cell.vector(1) * j as f64
                        + cell.vector(2) * k as f64;
                    let d = (image - point).norm();
                    if d > spec.r_cut {
                        continue;
                    }
                    for n in 0..spec.n_radial {
                        let mu = spec.r_cut * n as f64 / (spec.n_radial - 1) as f64;
                        out[slot * spec.n_radial + n] += (-(d - mu).powi(2) / (2.0 * spec.ell * spec.ell)).exp();
                    }
                }
            }
        }
    }
    out[spec.dim() - 1] = 1.0;
    out
}

/// Periodic potential of a Gaussian charge z (width σ) at the origin of a
/// cubic cell, with the G = 0 term removed, by an Ewald split at width
/// `split` > σ: a short-ranged erf difference in real space plus a smooth
/// reciprocal sum.
pub fn gaussian_potential_oracle(a: f64, z: f64, sigma: f64, split: f64, r: &Vec3) -> f64 {
    let omega = a * a * a;
    let (s2, w2) = (sigma * 2f64.sqrt(), split * 2f64.sqrt());
    let mut real = 0.0;
    let reach = (12.0 * split / a).ceil() as i32 + 1;
    for i in -reach..=reach {
        for j in -reach..=reach {
            for k in -reach..=reach {
                let d = (r - Vec3::new(i as f64, j as f64, k as f64) * a).norm();
                real += if d < 1e-12 {
                    -z * (2.0 / PI).sqrt() * (1.0 / sigma - 1.0 / split)
                } else {
                    -z * (libm::erf(d / s2) - libm::erf(d / w2)) / d
                };
            }
        }
    }
    let g_unit = 2.0 * PI / a;
    let m_max = ((2.0 * 42.0f64).sqrt() / split / g_unit).ceil() as i32;
    let mut recip = 0.0;
    for h in -m_max..=m_max {
        for k in -m_max..=m_max {
            for l in -m_max..=m_max {
                if (h, k, l) == (0, 0, 0) {
                    continue;
                }
                let g = Vec3::new(h as f64, k as f64, l as f64) * g_unit;
                let g2 = g.norm_squared();
                recip += -4.0 * PI * z / omega * (-0.5 * g2 * split * split).exp() / g2 * g.dot(r).cos();
            }
        }
    }
    real + recip + 2.0 * PI * z * (split * split - sigma * sigma) / omega
}

/// Analytic Gaussian atom holding `z` electrons, tabulated out to 10 bohr.
pub fn gaussian_radial(z: f64, width: f64) -> RadialDensity {
    let n = 2000;
    let r: Vec<f64> = (0..n).map(|i| 10.0 * i as f64 / (n - 1) as f64).collect();
    let rho = r.iter().map(|&t| gaussian_atom(z, width, t)).collect();
    RadialDensity::new(r, rho)
}

pub fn gaussian_atom(z: f64, width: f64, r: f64) -> f64 {
    z * (2.0 * PI * width * width).powf(-1.5) * (-0.5 * r * r / (width * width)).exp()
}

pub fn gaussian_table(species: &[Species]) -> AtomicDensityTable {
    let mut t = AtomicDensityTable::new();
    for s in species {
        t.insert(*s, gaussian_radial(s.z_val, 0.8 + 0.2 * s.sigma));
    }
    t
}

/// s-AUC evaluated directly in base 10.
pub fn s_auc_base10(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let (lx, ly) = (x[i].log10(), y[i].log10());
        num += lx - ly;
        den += lx.max(ly).abs();
    }
    num / den
}

/// Random rotation from a normalized quaternion.
pub fn random_rotation(rng: &mut ChaCha8Rng) -> nalgebra::Matrix3<f64> {
    let q = nalgebra::Quaternion::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    );
    nalgebra::UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
}

/// Geometric series a·r^k with a little multiplicative jitter.
pub fn decaying_series(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let a: f64 = rng.random_range(1e-3..1.0);
    let ratio: f64 = rng.random_range(0.2..0.9);
    (0..len)
        .map(|k| a * ratio.powi(k as i32) * rng.random_range(0.5..2.0))
        .collect()
}
