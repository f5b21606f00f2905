use super::PredictError;
use crate::crystal::{for_each_image, SpeciesId, Structure, Vec3};
use serde::{Deserialize, Serialize};

/// Radial Gaussian basis per species around a query point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSpec {
    pub r_cut: f64,
    pub n_radial: usize,
    pub ell: f64,
    pub species_list: Vec<SpeciesId>,
}

impl DescriptorSpec {
    /// Default basis: r_cut 6 bohr, 24 centres, width r_cut/n_radial.
    pub fn new(species_list: Vec<SpeciesId>) -> Self {
        Self::with_basis(species_list, 6.0, 24)
    }

    pub fn with_basis(species_list: Vec<SpeciesId>, r_cut: f64, n_radial: usize) -> Self {
        DescriptorSpec {
            r_cut,
            n_radial,
            ell: r_cut / n_radial as f64,
            species_list,
        }
    }

    pub fn validate(&self) -> Result<(), PredictError> {
        let bad = |m: &str| Err(PredictError::InvalidSpec(m.into()));
        if !(self.r_cut > 0.0 && self.r_cut.is_finite()) {
            return bad("r_cut must be positive");
        }
        if self.n_radial < 2 {
            return bad("n_radial must be at least 2");
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return bad("ell must be positive");
        }
        let mut ids = self.species_list.clone();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.species_list.len() || ids.is_empty() {
            return bad("species_list must be non-empty and unique");
        }
        Ok(())
    }

    /// n_species·n_radial + 1; the last entry is the bias.
    pub fn dim(&self) -> usize {
        self.species_list.len() * self.n_radial + 1
    }

    pub fn centre(&self, k: usize) -> f64 {
        self.r_cut * k as f64 / (self.n_radial - 1) as f64
    }

    pub fn slot(&self, species: SpeciesId) -> Option<usize> {
        self.species_list.iter().position(|&s| s == species)
    }

    pub fn covers(&self, structure: &Structure) -> Result<(), PredictError> {
        match structure.atoms().iter().find(|a| self.slot(a.species).is_none()) {
            Some(a) => Err(PredictError::Coverage(a.species)),
            None => Ok(()),
        }
    }
}

/// Descriptor of `point` in `structure`. Species missing from the spec are
/// ignored here; use [`DescriptorSpec::covers`] to reject them.
///
/// Neighbour distances are summed in ascending order per species, so the
/// result does not depend on atom order.
pub fn featurize(structure: &Structure, point: &Vec3, spec: &DescriptorSpec) -> Vec<f64> {
    let mut dists: Vec<Vec<f64>> = vec![Vec::new(); spec.species_list.len()];
    for atom in structure.atoms() {
        if let Some(slot) = spec.slot(atom.species) {
            for_each_image(structure.cell(), point, &atom.position, spec.r_cut, |d, _| dists[slot].push(d));
        }
    }
    let mut out = vec![0.0; spec.dim()];
    let inv = 1.0 / (2.0 * spec.ell * spec.ell);
    let centres: Vec<f64> = (0..spec.n_radial).map(|k| spec.centre(k)).collect();
    for (slot, ds) in dists.iter_mut().enumerate() {
        ds.sort_by(f64::total_cmp);
        let row = &mut out[slot * spec.n_radial..(slot + 1) * spec.n_radial];
        for &d in ds.iter() {
            for (v, mu) in row.iter_mut().zip(&centres) {
                let x = d - mu;
                *v += (-x * x * inv).exp();
            }
        }
    }
    out[spec.dim() - 1] = 1.0;
    out
}
