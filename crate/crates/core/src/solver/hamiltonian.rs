use super::{PwBasis, SolverError, SolverParams};
use crate::crystal::{within_cutoff, DensityField, Fft3, Grid, Spectrum, Structure};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// (3/π)^{1/3}
pub(crate) fn slater_prefactor() -> f64 {
    (3.0 / PI).cbrt()
}

/// Densities below this (electrons/bohr³) are rejected as unphysical.
pub(crate) const NEGATIVE_FLOOR: f64 = -1e-8;

/// v_x(r) = −(3/π)^{1/3} ρ(r)^{1/3}; negative ripples are treated as zero.
pub fn exchange_potential(rho: f64) -> f64 {
    -slater_prefactor() * rho.max(0.0).cbrt()
}

/// E_x = −¾(3/π)^{1/3} ∫ρ^{4/3}.
pub fn exchange_energy(rho: &DensityField) -> f64 {
    let c = 0.75 * slater_prefactor();
    -c * rho.grid().weight()
        * rho
            .values()
            .iter()
            .map(|&v| {
                let v = v.max(0.0);
                v * v.cbrt()
            })
            .sum::<f64>()
}

/// Local pseudopotential V_loc(G) of the Gaussian pseudocharges on every FFT
/// bin of `grid` (centred frequencies), with the G = 0 term set to zero.
pub fn local_potential(structure: &Structure, grid: &Grid) -> Spectrum {
    let cell = grid.cell();
    let omega = cell.volume();
    let mut spec = Spectrum::zeros(grid.clone());
    let fracs: Vec<_> = structure
        .atoms()
        .iter()
        .map(|a| {
            let s = structure.species(a.species).expect("validated species");
            (cell.to_fractional(&a.position), s.z_val, s.sigma)
        })
        .collect();
    for (idx, c) in spec.coeffs_mut().iter_mut().enumerate() {
        let m = grid.frequency(idx);
        if m == [0, 0, 0] {
            continue;
        }
        let g2 = cell.gvector(m).norm_squared();
        let mut acc = Complex64::default();
        for (f, z, sigma) in &fracs {
            let amp = -4.0 * PI * z / omega * (-0.5 * g2 * sigma * sigma).exp() / g2;
            let phase = -2.0 * PI * (m[0] as f64 * f.x + m[1] as f64 * f.y + m[2] as f64 * f.z);
            acc += Complex64::from_polar(amp, phase);
        }
        *c = acc;
    }
    spec
}

/// Max |H − H†| over all entries.
pub fn hermiticity_residual(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Anything the eigensolver can multiply a block of vectors by.
pub trait HamiltonianOp {
    fn dim(&self) -> usize;
    fn diagonal(&self) -> Vec<f64>;
    fn apply(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64>;
}

impl HamiltonianOp for DMatrix<Complex64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows()).map(|i| self[(i, i)].re).collect()
    }

    fn apply(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self * x
    }
}

/// Precomputed geometry for one structure at fixed cutoffs: grid, FFT plan,
/// plane-wave basis, Coulomb kernel and the local pseudopotential.
#[derive(Debug)]
pub struct SolverSetup {
    structure: Structure,
    params: SolverParams,
    grid: Grid,
    fft: Fft3,
    basis: PwBasis,
    coulomb: Vec<f64>,
    sphere: Vec<bool>,
    v_loc: Vec<Complex64>,
    ion_energy: f64,
}

/// Effective potential on FFT bins restricted to the density sphere, plus
/// the real-space Hartree+exchange part used for double counting.
#[derive(Debug, Clone)]
pub(crate) struct Potential {
    pub total: Vec<Complex64>,
    pub hxc_real: Vec<f64>,
}

impl SolverSetup {
    pub fn new(structure: &Structure, params: &SolverParams) -> Result<Self, SolverError> {
        params.validate()?;
        let cell = structure.cell();
        let grid = Grid::for_cutoff(cell, params.ecutrho);
        let basis = PwBasis::new(cell, params.ecutwfc, &grid);
        let mut coulomb = vec![0.0; grid.len()];
        let mut sphere = vec![false; grid.len()];
        for idx in 0..grid.len() {
            let m = grid.frequency(idx);
            let g2 = cell.gvector(m).norm_squared();
            sphere[idx] = within_cutoff(0.5 * g2, params.ecutrho);
            if m != [0, 0, 0] {
                coulomb[idx] = 4.0 * PI / g2;
            }
        }
        let mut v_loc = local_potential(structure, &grid).coeffs().to_vec();
        for (v, &keep) in v_loc.iter_mut().zip(&sphere) {
            if !keep {
                *v = Complex64::default();
            }
        }
        Ok(SolverSetup {
            structure: structure.clone(),
            params: *params,
            fft: Fft3::new(grid.dims()),
            grid,
            basis,
            coulomb,
            sphere,
            v_loc,
            ion_energy: super::ewald_energy(structure) + super::pseudo_offset_energy(structure),
        })
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// Ion-ion Ewald energy plus the pseudopotential G=0 offset; a constant
    /// added to every total energy.
    pub fn ion_energy(&self) -> f64 {
        self.ion_energy
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> &PwBasis {
        &self.basis
    }

    pub(crate) fn fft(&self) -> &Fft3 {
        &self.fft
    }

    pub fn n_occupied(&self) -> usize {
        self.structure.n_occupied()
    }

    pub fn n_bands(&self) -> usize {
        self.n_occupied() + self.params.extra_bands
    }

    pub(crate) fn check_density(&self, rho: &DensityField) -> Result<(), SolverError> {
        if rho.grid().dims() != self.grid.dims() {
            return Err(SolverError::GridMismatch {
                expected: self.grid.dims(),
                got: rho.grid().dims(),
            });
        }
        let min = rho.min();
        if min < NEGATIVE_FLOOR {
            return Err(SolverError::InvalidDensity { min });
        }
        let ne = self.structure.n_electrons();
        let got = rho.integral();
        if (got - ne).abs() > 1e-8 * ne.max(1.0) {
            return Err(SolverError::ChargeMismatch { expected: ne, got });
        }
        Ok(())
    }

    /// ρ(G) on every bin, normalized as in [`fft_forward`].
    pub(crate) fn spectrum(&self, rho: &DensityField) -> Vec<Complex64> {
        let scale = 1.0 / self.grid.len() as f64;
        let mut buf: Vec<Complex64> = rho.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    fn to_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.fft.inverse(&mut spec);
        spec.into_iter().map(|c| c.re).collect()
    }

    /// Drops every Fourier component outside the density cutoff sphere.
    pub fn lowpass(&self, rho: &DensityField) -> DensityField {
        let mut spec = self.spectrum(rho);
        for (c, &keep) in spec.iter_mut().zip(&self.sphere) {
            if !keep {
                *c = Complex64::default();
            }
        }
        DensityField::new(self.grid.clone(), self.to_real(spec)).expect("finite lowpass")
    }

    /// E_H[ρ] = ½ Σ_{G≠0} 4π|ρ(G)|² Ω/|G|².
    pub fn hartree_energy(&self, rho: &DensityField) -> f64 {
        let spec = self.spectrum(rho);
        self.hartree_of_spectrum(&spec)
    }

    pub(crate) fn hartree_of_spectrum(&self, spec: &[Complex64]) -> f64 {
        let omega = self.grid.cell().volume();
        0.5 * omega
            * spec
                .iter()
                .zip(&self.coulomb)
                .map(|(c, k)| k * c.norm_sqr())
                .sum::<f64>()
    }

    pub(crate) fn potential(&self, rho: &DensityField) -> Potential {
        let rho_g = self.spectrum(rho);
        let mut hxc: Vec<Complex64> = rho_g.iter().zip(&self.coulomb).map(|(c, k)| c * *k).collect();
        if self.params.exchange {
            let scale = 1.0 / self.grid.len() as f64;
            let mut vx: Vec<Complex64> = rho
                .values()
                .iter()
                .map(|&v| Complex64::new(exchange_potential(v), 0.0))
                .collect();
            self.fft.forward(&mut vx);
            for (h, x) in hxc.iter_mut().zip(&vx) {
                *h += x * scale;
            }
        }
        for (h, &keep) in hxc.iter_mut().zip(&self.sphere) {
            if !keep {
                *h = Complex64::default();
            }
        }
        let total = hxc.iter().zip(&self.v_loc).map(|(a, b)| a + b).collect();
        let hxc_real = self.to_real(hxc);
        Potential { total, hxc_real }
    }

    pub(crate) fn dense_hamiltonian(&self, pot: &Potential) -> DMatrix<Complex64> {
        let n = self.basis.len();
        let miller = self.basis.miller();
        let kin = self.basis.kinetic();
        let v0 = pot.total[0].re;
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..n {
            h[(j, j)] = Complex64::new(kin[j] + v0, 0.0);
            for i in 0..j {
                let d = [
                    miller[i][0] - miller[j][0],
                    miller[i][1] - miller[j][1],
                    miller[i][2] - miller[j][2],
                ];
                let v = pot.total[self.grid.miller_index(d)];
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        h
    }

    pub(crate) fn fft_hamiltonian(&self, pot: &Potential) -> FftHamiltonian<'_> {
        let v_real = self.to_real(pot.total.clone());
        FftHamiltonian {
            setup: self,
            v_real,
            v0: pot.total[0].re,
        }
    }
}

/// H applied matrix-free: kinetic diagonal in G space, local potential on the grid.
pub struct FftHamiltonian<'a> {
    setup: &'a SolverSetup,
    v_real: Vec<f64>,
    v0: f64,
}

impl HamiltonianOp for FftHamiltonian<'_> {
    fn dim(&self) -> usize {
        self.setup.basis.len()
    }

    fn diagonal(&self) -> Vec<f64> {
        self.setup.basis.kinetic().iter().map(|k| k + self.v0).collect()
    }

    fn apply(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let basis = &self.setup.basis;
        let idx = basis.grid_index();
        let kin = basis.kinetic();
        let j = self.setup.grid.len();
        let scale = 1.0 / j as f64;
        let mut out = DMatrix::<Complex64>::zeros(x.nrows(), x.ncols());
        let mut buf = vec![Complex64::default(); j];
        for col in 0..x.ncols() {
            buf.iter_mut().for_each(|c| *c = Complex64::default());
            for (row, &g) in idx.iter().enumerate() {
                buf[g] = x[(row, col)];
            }
            self.setup.fft.inverse(&mut buf);
            for (b, v) in buf.iter_mut().zip(&self.v_real) {
                *b *= *v;
            }
            self.setup.fft.forward(&mut buf);
            for (row, &g) in idx.iter().enumerate() {
                out[(row, col)] = buf[g] * scale + x[(row, col)] * kin[row];
            }
        }
        out
    }
}

/// H[ρ] over the wavefunction plane waves, exactly Hermitian by construction.
pub fn build_hamiltonian(
    structure: &Structure,
    density: &DensityField,
    params: &SolverParams,
) -> Result<DMatrix<Complex64>, SolverError> {
    let setup = SolverSetup::new(structure, params)?;
    setup.check_density(density)?;
    let h = setup.dense_hamiltonian(&setup.potential(density));
    debug_assert!(hermiticity_residual(&h) <= 1e-12);
    Ok(h)
}
