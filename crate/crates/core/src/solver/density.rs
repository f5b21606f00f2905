use super::KsOrbitals;
use crate::crystal::{fft_forward, DensityField, Fft3, Grid};
use num_complex::Complex64;
use std::f64::consts::PI;

/// ρ(r) = Σ_k occ_k |ψ_k(r)|² with ψ_k(r) = Ω^{-1/2} Σ_G c_k(G) e^{iG·r}.
pub fn density_from_orbitals(orbitals: &KsOrbitals, grid: &Grid) -> DensityField {
    let fft = Fft3::new(grid.dims());
    density_with(&fft, orbitals, grid)
}

pub(crate) fn density_with(fft: &Fft3, orbitals: &KsOrbitals, grid: &Grid) -> DensityField {
    let index: Vec<usize> = orbitals.miller.iter().map(|&m| grid.miller_index(m)).collect();
    let inv_omega = 1.0 / grid.cell().volume();
    let mut rho = vec![0.0; grid.len()];
    let mut buf = vec![Complex64::default(); grid.len()];
    for k in 0..orbitals.n_bands() {
        let occ = orbitals.occupations[k];
        if occ == 0.0 {
            continue;
        }
        buf.iter_mut().for_each(|c| *c = Complex64::default());
        for (row, &g) in index.iter().enumerate() {
            buf[g] = orbitals.coeffs[(row, k)];
        }
        fft.inverse(&mut buf);
        for (r, c) in rho.iter_mut().zip(&buf) {
            *r += occ * inv_omega * c.norm_sqr();
        }
    }
    DensityField::new(grid.clone(), rho).expect("finite orbital density")
}

/// E_H[ρ] = ½ Σ_{G≠0} 4π|ρ(G)|² Ω/|G|² over every bin of the field's grid.
pub fn hartree_energy(rho: &DensityField) -> f64 {
    let spec = fft_forward(rho);
    let grid = rho.grid();
    let cell = grid.cell();
    let mut acc = 0.0;
    for (idx, c) in spec.coeffs().iter().enumerate() {
        let m = grid.frequency(idx);
        if m == [0, 0, 0] {
            continue;
        }
        acc += 4.0 * PI * c.norm_sqr() / cell.gvector(m).norm_squared();
    }
    0.5 * cell.volume() * acc
}

/// Hartree self-energy of the residual ρ_out − ρ_in.
pub fn scf_accuracy(rho_in: &DensityField, rho_out: &DensityField) -> f64 {
    assert!(rho_in.same_grid(rho_out), "scf_accuracy needs matching grids");
    let diff: Vec<f64> = rho_out
        .values()
        .iter()
        .zip(rho_in.values())
        .map(|(o, i)| o - i)
        .collect();
    hartree_energy(&DensityField::new(rho_in.grid().clone(), diff).expect("finite residual"))
}
