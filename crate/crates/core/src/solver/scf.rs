use super::density::density_with;
use super::eigen::dense_lowest;
use super::{davidson, Eigenpairs, KsOrbitals, Mixing, ScfTrace, SolverError, SolverParams, SolverSetup};
use super::{exchange_energy, hermiticity_residual};
use crate::crystal::{DensityField, Structure};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::VecDeque;
use std::sync::Arc;

/// Bases larger than this are applied matrix-free through the FFT.
const MATRIX_FREE_ABOVE: usize = 1500;
/// Cold starts use a full dense diagonalization up to this size.
const DENSE_COLD_START_UPTO: usize = 800;
/// Unconverged buffer columns carried by the iterative eigensolver.
const BUFFER_BANDS: usize = 2;
const EIGEN_TOL: f64 = 1e-9;
const EIGEN_MAX_ITER: usize = 400;

/// Numerical health of one SCF iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationDiagnostics {
    /// max|H − H†| of the dense Hamiltonian; zero for matrix-free runs.
    pub hermiticity: f64,
    pub max_eigen_residual: f64,
    /// |∫ρ_in − N_e| / N_e.
    pub charge_error: f64,
    pub orthonormality: f64,
}

#[derive(Debug, Clone)]
pub struct ScfOutcome {
    pub trace: ScfTrace,
    /// Input density of the last iteration (the fixed point when converged).
    pub density: DensityField,
    pub orbitals: KsOrbitals,
    pub diagnostics: Vec<IterationDiagnostics>,
}

enum Mixer {
    Linear(f64),
    Anderson(Anderson),
}

struct Anderson {
    depth: usize,
    alpha: f64,
    history: VecDeque<(Vec<f64>, Vec<f64>)>,
}

impl Anderson {
    fn next(&mut self, rho_in: &[f64], rho_out: &[f64]) -> Vec<f64> {
        let resid: Vec<f64> = rho_out.iter().zip(rho_in).map(|(o, i)| o - i).collect();
        self.history.push_back((rho_in.to_vec(), resid));
        while self.history.len() > self.depth + 1 {
            self.history.pop_front();
        }
        let k = self.history.len();
        let mut a = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let d: f64 = self.history[i].1.iter().zip(&self.history[j].1).map(|(x, y)| x * y).sum();
                a[(i, j)] = d;
                a[(j, i)] = d;
            }
        }
        let reg = 1e-12 * a.trace().max(f64::MIN_POSITIVE) / k as f64;
        for i in 0..k {
            a[(i, i)] += reg;
        }
        let ones = nalgebra::DVector::<f64>::from_element(k, 1.0);
        let coeffs = match a.lu().solve(&ones) {
            Some(c) if c.sum().abs() > 0.0 && c.iter().all(|x| x.is_finite()) => {
                let total = c.sum();
                c / total
            }
            _ => {
                let mut c = nalgebra::DVector::zeros(k);
                c[k - 1] = 1.0;
                c
            }
        };
        let mut out = vec![0.0; rho_in.len()];
        for (c, (rho, f)) in coeffs.iter().zip(&self.history) {
            for ((o, r), fi) in out.iter_mut().zip(rho).zip(f) {
                *o += c * (r + self.alpha * fi);
            }
        }
        out
    }
}

impl Mixer {
    fn new(params: &SolverParams) -> Self {
        match params.mixing {
            Mixing::Linear => Mixer::Linear(params.mix_alpha),
            Mixing::Anderson { depth } => Mixer::Anderson(Anderson {
                depth,
                alpha: params.mix_alpha,
                history: VecDeque::new(),
            }),
        }
    }

    fn next(&mut self, rho_in: &[f64], rho_out: &[f64]) -> Vec<f64> {
        match self {
            Mixer::Linear(alpha) => rho_in
                .iter()
                .zip(rho_out)
                .map(|(i, o)| (1.0 - *alpha) * i + *alpha * o)
                .collect(),
            Mixer::Anderson(a) => a.next(rho_in, rho_out),
        }
    }
}

/// Runs the SCF fixed-point iteration from `initial`.
///
/// The initial density is projected onto the density cutoff sphere first,
/// so every iterate (and the returned density) is band-limited.
/// Non-convergence is reported through the trace, not as an error.
pub fn run_scf(
    structure: &Structure,
    initial: &DensityField,
    params: &SolverParams,
) -> Result<ScfOutcome, SolverError> {
    let setup = SolverSetup::new(structure, params)?;
    run_scf_with(&setup, initial)
}

pub fn run_scf_with(setup: &SolverSetup, initial: &DensityField) -> Result<ScfOutcome, SolverError> {
    setup.check_density(initial)?;
    let params = *setup.params();
    let grid = setup.grid().clone();
    let n_e = setup.structure().n_electrons();
    let n_occ = setup.n_occupied();
    let n_bands = setup.n_bands();
    let n_pw = setup.basis().len();
    if n_bands > n_pw {
        return Err(SolverError::InsufficientBands { needed: n_bands, have: n_pw });
    }
    let block = (n_bands + BUFFER_BANDS).min(n_pw);
    let miller = Arc::new(setup.basis().miller().to_vec());
    let matrix_free = n_pw > MATRIX_FREE_ABOVE;

    let mut rho_in = setup.lowpass(initial);
    let mut mixer = Mixer::new(&params);
    let mut guess: Option<DMatrix<Complex64>> = None;
    let (mut accs, mut energies, mut diags) = (Vec::new(), Vec::new(), Vec::new());
    let mut last_orbitals = None;

    for iter in 1..=params.max_iter {
        let pot = setup.potential(&rho_in);
        let (pairs, hermiticity): (Eigenpairs, f64) = if matrix_free {
            let op = setup.fft_hamiltonian(&pot);
            let start = guess.take().unwrap_or_else(|| unit_guess(setup, block));
            (davidson(&op, &start, n_bands, EIGEN_TOL, EIGEN_MAX_ITER)?, 0.0)
        } else {
            let h = setup.dense_hamiltonian(&pot);
            let herm = hermiticity_residual(&h);
            debug_assert!(herm <= 1e-12);
            let pairs = match guess.take() {
                None if n_pw <= DENSE_COLD_START_UPTO => dense_lowest(&h, block)?,
                None => davidson(&h, &unit_guess(setup, block), n_bands, EIGEN_TOL, EIGEN_MAX_ITER)?,
                Some(g) => davidson(&h, &g, n_bands, EIGEN_TOL, EIGEN_MAX_ITER)?,
            };
            (pairs, herm)
        };
        guess = Some(pairs.vectors.clone());
        let bands = Eigenpairs {
            values: pairs.values[..n_bands].to_vec(),
            vectors: pairs.vectors.columns(0, n_bands).into_owned(),
            residuals: pairs.residuals[..n_bands].to_vec(),
            iterations: pairs.iterations,
        };
        let orbitals = KsOrbitals::aufbau(miller.clone(), &bands, n_occ);
        let rho_out = density_with(setup.fft(), &orbitals, &grid);
        if rho_out.values().iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NumericalBlowup(iter));
        }

        let diff = DensityField::new(
            grid.clone(),
            rho_out.values().iter().zip(rho_in.values()).map(|(o, i)| o - i).collect(),
        )
        .map_err(|_| SolverError::NumericalBlowup(iter))?;
        let accuracy = setup.hartree_of_spectrum(&setup.spectrum(&diff));

        let double_counting = grid.weight()
            * pot.hxc_real.iter().zip(rho_out.values()).map(|(v, r)| v * r).sum::<f64>();
        let exchange = if params.exchange { exchange_energy(&rho_out) } else { 0.0 };
        let energy = orbitals.band_energy() - double_counting + setup.hartree_energy(&rho_out) + exchange + setup.ion_energy();
        if !energy.is_finite() || !accuracy.is_finite() {
            return Err(SolverError::NumericalBlowup(iter));
        }

        diags.push(IterationDiagnostics {
            hermiticity,
            max_eigen_residual: bands.residuals.iter().copied().fold(0.0, f64::max),
            charge_error: (rho_in.integral() - n_e).abs() / n_e.max(1.0),
            orthonormality: orbitals.orthonormality_error(),
        });
        accs.push(accuracy);
        energies.push(energy);
        last_orbitals = Some(orbitals);

        if accuracy < params.conv_thr || iter == params.max_iter {
            break;
        }
        let next = mixer.next(rho_in.values(), rho_out.values());
        if next.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NumericalBlowup(iter));
        }
        rho_in = DensityField::new(grid.clone(), next).map_err(|_| SolverError::NumericalBlowup(iter))?;
    }

    Ok(ScfOutcome {
        trace: ScfTrace::from_series(accs, energies, params.conv_thr),
        density: rho_in,
        orbitals: last_orbitals.expect("max_iter >= 1"),
        diagnostics: diags,
    })
}

/// Unit vectors on the lowest-kinetic plane waves.
fn unit_guess(setup: &SolverSetup, block: usize) -> DMatrix<Complex64> {
    let n = setup.basis().len();
    let mut g = DMatrix::<Complex64>::zeros(n, block);
    for k in 0..block {
        g[(k, k)] = Complex64::new(1.0, 0.0);
    }
    g
}
