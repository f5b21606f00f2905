//! Initial densities: atomic-charge superposition (ACS) from radial atomic
//! tables, and admission of externally predicted densities.

mod acs;
mod ingest;
mod radial;
mod table;

pub use acs::acs_density;
pub use ingest::{ingest_predicted_density, PREDICTION_FLOOR};
pub use radial::{MonotoneCubic, RadialDensity};
pub use table::{build_atomic_table, AtomicDensityTable, ATOM_CELL_SIDE, TABLE_OUTER_RADIUS, TABLE_POINTS};

use crate::crystal::SpeciesId;
use crate::solver::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InitError {
    #[error("species {0} has no atomic density table")]
    TableMiss(SpeciesId),
    #[error("atomic table for species {species} failed: {reason}")]
    TableBuild { species: SpeciesId, reason: String },
    #[error("prediction unusable: {below} of {total} values at or below the floor")]
    DegeneratePrediction { below: usize, total: usize },
    #[error("prediction grid {got:?} does not match solver grid {expected:?}")]
    GridMismatch { expected: [usize; 3], got: [usize; 3] },
    #[error("table file: {0}")]
    Io(#[from] std::io::Error),
    #[error("table file: {0}")]
    Format(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
