//! Γ-point plane-wave Kohn-Sham SCF with local Gaussian pseudopotentials and
//! Slater exchange. Spin-restricted, integer (aufbau) occupations.

mod basis;
mod density;
mod eigen;
mod ewald;
mod hamiltonian;
mod params;
mod scf;
mod trace;

pub use basis::PwBasis;
pub use density::{density_from_orbitals, hartree_energy, scf_accuracy};
pub use ewald::{ewald_energy, pseudo_offset_energy};
pub use eigen::{band_gap, davidson, solve_linear_eigenproblem, Eigenpairs, KsOrbitals};
pub use hamiltonian::{
    build_hamiltonian, exchange_energy, exchange_potential, hermiticity_residual,
    local_potential, FftHamiltonian, HamiltonianOp, SolverSetup,
};
pub use params::{Mixing, SolverParams};
pub use scf::{run_scf, run_scf_with, IterationDiagnostics, ScfOutcome};
pub use trace::ScfTrace;

use crate::crystal::CrystalError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error("density grid {got:?} does not match solver grid {expected:?}")]
    GridMismatch { expected: [usize; 3], got: [usize; 3] },
    #[error("density has value {min:e} below the admissible floor")]
    InvalidDensity { min: f64 },
    #[error("density integrates to {got} electrons, expected {expected}")]
    ChargeMismatch { expected: f64, got: f64 },
    #[error("eigensolver failed after {iterations} iterations (max residual {residual:e}): {message}")]
    Eigen {
        iterations: usize,
        residual: f64,
        message: String,
    },
    #[error("non-finite density at SCF iteration {0}")]
    NumericalBlowup(usize),
    #[error("need at least {needed} bands, have {have}")]
    InsufficientBands { needed: usize, have: usize },
    #[error("occupations are not aufbau (negative gap {0:e})")]
    NonAufbau(f64),
    #[error(transparent)]
    Crystal(#[from] CrystalError),
}
