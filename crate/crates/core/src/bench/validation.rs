use super::ConvergencePair;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBiasReport {
    /// (structure id, |E_learned − E_baseline| / |E_baseline|)
    pub per_structure: Vec<(String, f64)>,
    pub skipped: usize,
    pub share_zero: f64,
    pub mean_nonzero: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// (structure id, |gap_learned − gap_baseline|) in hartree
    pub per_structure: Vec<(String, f64)>,
    pub skipped: usize,
    pub mean: f64,
    pub max: f64,
}

/// Relative final-energy differences over pairs where both runs converged.
pub fn validate_energy_bias(pairs: &[ConvergencePair]) -> EnergyBiasReport {
    let per: Vec<(String, f64)> = pairs
        .iter()
        .filter_map(|p| p.energy_rel_diff().map(|d| (p.structure_id.clone(), d)))
        .collect();
    let nonzero: Vec<f64> = per.iter().map(|(_, d)| *d).filter(|&d| d != 0.0).collect();
    EnergyBiasReport {
        skipped: pairs.len() - per.len(),
        share_zero: if per.is_empty() {
            f64::NAN
        } else {
            (per.len() - nonzero.len()) as f64 / per.len() as f64
        },
        mean_nonzero: if nonzero.is_empty() {
            0.0
        } else {
            nonzero.iter().sum::<f64>() / nonzero.len() as f64
        },
        max: per.iter().map(|(_, d)| *d).fold(0.0, f64::max),
        per_structure: per,
    }
}

/// Band-gap differences over pairs where both runs converged with an empty band.
pub fn validate_gaps(pairs: &[ConvergencePair]) -> GapReport {
    let per: Vec<(String, f64)> = pairs
        .iter()
        .filter_map(|p| p.gap_diff().map(|d| (p.structure_id.clone(), d)))
        .collect();
    GapReport {
        skipped: pairs.len() - per.len(),
        mean: if per.is_empty() {
            0.0
        } else {
            per.iter().map(|(_, d)| d).sum::<f64>() / per.len() as f64
        },
        max: per.iter().map(|(_, d)| *d).fold(0.0, f64::max),
        per_structure: per,
    }
}
