use super::InitError;
use crate::crystal::{DensityField, Grid, Structure};

/// Values at or below this (electrons/bohr³) count as missing.
pub const PREDICTION_FLOOR: f64 = 1e-10;

/// Makes a raw prediction solver-admissible: values are floored at
/// [`PREDICTION_FLOOR`] and the rest rescaled so the integral is N_e.
///
/// The scale `s` solves ∫max(s·ρ, floor) = N_e, which makes the operation
/// idempotent.
pub fn ingest_predicted_density(raw: &DensityField, structure: &Structure, grid: &Grid) -> Result<DensityField, InitError> {
    if raw.grid().dims() != grid.dims() {
        return Err(InitError::GridMismatch {
            expected: grid.dims(),
            got: raw.grid().dims(),
        });
    }
    let values = raw.values();
    let total = values.len();
    let below = values.iter().filter(|&&v| v <= PREDICTION_FLOOR).count();
    if 2 * below >= total {
        return Err(InitError::DegeneratePrediction { below, total });
    }
    let n_e = structure.n_electrons();
    let w = grid.weight();
    let mut s = 1.0;
    for _ in 0..100 {
        let (mut floor_count, mut mass) = (0usize, 0.0);
        for &v in values {
            if s * v > PREDICTION_FLOOR {
                mass += v;
            } else {
                floor_count += 1;
            }
        }
        let next = (n_e / w - PREDICTION_FLOOR * floor_count as f64) / mass;
        if next == s {
            break;
        }
        s = next;
    }
    let out: Vec<f64> = values.iter().map(|&v| (s * v).max(PREDICTION_FLOOR)).collect();
    DensityField::new(grid.clone(), out).map_err(|e| InitError::Format(e.to_string()))
}
