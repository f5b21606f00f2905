use crate::crystal::{for_each_image, gvectors_within, Structure};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Ewald energy of point ions of charge z_val in a uniform neutralizing
/// background (hartree).
pub fn ewald_energy(structure: &Structure) -> f64 {
    let atoms = structure.atoms();
    if atoms.is_empty() {
        return 0.0;
    }
    let cell = structure.cell();
    let omega = cell.volume();
    let z: Vec<f64> = atoms
        .iter()
        .map(|a| structure.species(a.species).map_or(0.0, |s| s.z_val))
        .collect();
    let z_tot: f64 = z.iter().sum();
    let z_sq: f64 = z.iter().map(|v| v * v).sum();
    let eta = PI.sqrt() / omega.cbrt();
    let r_cut = 6.0 / eta;
    let g_cut = 2.0 * eta * 39f64.sqrt();

    let mut real = 0.0;
    for (i, a) in atoms.iter().enumerate() {
        for (j, b) in atoms.iter().enumerate() {
            for_each_image(cell, &a.position, &b.position, r_cut, |d, _| {
                if d > 1e-10 {
                    real += 0.5 * z[i] * z[j] * libm::erfc(eta * d) / d;
                }
            });
        }
    }
    let mut recip = 0.0;
    for g in gvectors_within(cell, 0.5 * g_cut * g_cut) {
        let g2 = g.norm_squared();
        if g2 == 0.0 {
            continue;
        }
        let s: Complex64 = atoms
            .iter()
            .zip(&z)
            .map(|(a, &zi)| Complex64::from_polar(zi, g.g.dot(&a.position)))
            .sum();
        recip += 2.0 * PI / omega * (-g2 / (4.0 * eta * eta)).exp() / g2 * s.norm_sqr();
    }
    real + recip - eta / PI.sqrt() * z_sq - PI * z_tot * z_tot / (2.0 * omega * eta * eta)
}

/// Energy of the electrons in the non-Coulomb G=0 part of the Gaussian
/// pseudopotentials: (N_e/Ω)·Σ_i 2π z_i σ_i².
pub fn pseudo_offset_energy(structure: &Structure) -> f64 {
    let per_density: f64 = structure
        .atoms()
        .iter()
        .filter_map(|a| structure.species(a.species))
        .map(|s| 2.0 * PI * s.z_val * s.sigma * s.sigma)
        .sum();
    structure.n_electrons() / structure.cell().volume() * per_density
}
