//! Periodic cells, toy species, FFT grids and the reciprocal-space machinery
//! shared by the solver, the initializers and the predictor.
//!
//! Everything here is in Hartree atomic units (bohr, hartree). Lattice
//! matrices store the lattice vectors as rows.

mod cell;
mod density;
mod fft;
mod grid;
mod gvec;
mod images;
mod structure;

pub use cell::{reciprocal_lattice, Cell};
pub use density::DensityField;
pub use fft::{fft_forward, fft_inverse, Fft3, Spectrum};
pub use grid::{fft_friendly_size, Grid};
pub use gvec::{gvectors_within, miller_bounds, within_cutoff, GVector};
pub use images::{for_each_image, image_distances, min_image_distance};
pub use structure::{Atom, Species, SpeciesId, Structure};

use thiserror::Error;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

#[derive(Debug, Error)]
pub enum CrystalError {
    #[error("degenerate cell: determinant {0:e}")]
    DegenerateCell(f64),
    #[error("left-handed cell: determinant {0:e}")]
    LeftHandedCell(f64),
    #[error("invalid species {id}: {reason}")]
    InvalidSpecies { id: SpeciesId, reason: String },
    #[error("atom {index} references unknown species {id}")]
    UnknownSpecies { index: usize, id: SpeciesId },
    #[error("non-finite atom position at index {0}")]
    BadPosition(usize),
    #[error("odd or non-integer electron count {0}")]
    OddElectronCount(f64),
    #[error("grid dims must be positive, got {0:?}")]
    BadDims([usize; 3]),
    #[error("field has {got} values, grid needs {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("structure json: {0}")]
    Json(#[from] serde_json::Error),
}
