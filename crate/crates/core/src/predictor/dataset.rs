use super::{featurize, DescriptorSpec};
use crate::crystal::{DensityField, Structure};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

/// A structure paired with its converged density.
#[derive(Debug, Clone)]
pub struct TrainingItem {
    pub id: String,
    pub structure: Structure,
    pub density: DensityField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuerySample {
    pub features: Vec<f64>,
    pub target: f64,
    /// (index into the training items, grid index)
    pub source: (usize, usize),
}

/// Draws `n_per` distinct grid points from each item (all of them if the
/// grid is smaller), in item order, from one seeded stream.
pub fn sample_dataset(items: &[TrainingItem], spec: &DescriptorSpec, n_per: usize, seed: u64) -> Vec<QuerySample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (item_idx, item) in items.iter().enumerate() {
        let grid = item.density.grid();
        let j = grid.len();
        let picks: Vec<usize> = if n_per >= j {
            (0..j).collect()
        } else {
            index::sample(&mut rng, j, n_per).into_vec()
        };
        let values = item.density.values();
        let samples: Vec<QuerySample> = picks
            .par_iter()
            .map(|&g| QuerySample {
                features: featurize(&item.structure, &grid.point(g), spec),
                target: values[g].max(0.0),
                source: (item_idx, g),
            })
            .collect();
        out.extend(samples);
    }
    out
}

/// SHA-256 over item ids, sampled grid indices and target bit patterns.
pub fn sample_manifest_hash(items: &[TrainingItem], samples: &[QuerySample]) -> String {
    let mut h = Sha256::new();
    for s in samples {
        h.update(items[s.source.0].id.as_bytes());
        h.update([0u8]);
        h.update((s.source.1 as u64).to_le_bytes());
        h.update(s.target.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}
