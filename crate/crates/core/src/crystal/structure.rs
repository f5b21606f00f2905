use super::{Cell, CrystalError, Mat3, Vec3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub type SpeciesId = u32;

/// Toy species: a Gaussian pseudocharge of `z_val` electrons' worth of
/// positive charge and width `sigma` (bohr).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub id: SpeciesId,
    pub z_val: f64,
    pub sigma: f64,
}

impl Species {
    pub fn new(id: SpeciesId, z_val: f64, sigma: f64) -> Result<Self, CrystalError> {
        let s = Species { id, z_val, sigma };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CrystalError> {
        let bad = |reason: &str| {
            Err(CrystalError::InvalidSpecies {
                id: self.id,
                reason: reason.to_string(),
            })
        };
        if !(self.z_val > 0.0 && self.z_val.is_finite()) {
            return bad("z_val must be positive");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: Vec3,
    pub species: SpeciesId,
}

/// A periodic cell with atoms and the species table they reference.
///
/// `background_electrons` adds electrons on a uniform compensating
/// background; it is zero for every generated structure and only exists so
/// that empty-lattice (jellium) checks can hold electrons without atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    cell: Cell,
    atoms: Vec<Atom>,
    species: Vec<Species>,
    background_electrons: f64,
}

impl Structure {
    pub fn new(cell: Mat3, atoms: Vec<Atom>, species: Vec<Species>) -> Result<Self, CrystalError> {
        Self::build(Cell::new(cell)?, atoms, species, 0.0)
    }

    pub fn from_cell(cell: Cell, atoms: Vec<Atom>, species: Vec<Species>) -> Result<Self, CrystalError> {
        Self::build(cell, atoms, species, 0.0)
    }

    /// Atom-free cell holding `electrons` on a neutralizing background.
    pub fn empty_lattice(cell: Cell, electrons: f64) -> Result<Self, CrystalError> {
        Self::build(cell, Vec::new(), Vec::new(), electrons)
    }

    fn build(
        cell: Cell,
        atoms: Vec<Atom>,
        species: Vec<Species>,
        background_electrons: f64,
    ) -> Result<Self, CrystalError> {
        let mut seen = BTreeSet::new();
        for s in &species {
            s.validate()?;
            if !seen.insert(s.id) {
                return Err(CrystalError::InvalidSpecies {
                    id: s.id,
                    reason: "duplicate id in species table".into(),
                });
            }
        }
        for (index, a) in atoms.iter().enumerate() {
            if !seen.contains(&a.species) {
                return Err(CrystalError::UnknownSpecies { index, id: a.species });
            }
            if a.position.iter().any(|x| !x.is_finite()) {
                return Err(CrystalError::BadPosition(index));
            }
        }
        let s = Structure {
            cell,
            atoms,
            species,
            background_electrons,
        };
        let n = s.n_electrons();
        let pairs = (n / 2.0).round();
        if (n - 2.0 * pairs).abs() > 1e-9 || n < 0.0 {
            return Err(CrystalError::OddElectronCount(n));
        }
        Ok(s)
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn species_table(&self) -> &[Species] {
        &self.species
    }

    pub fn species(&self, id: SpeciesId) -> Option<&Species> {
        self.species.iter().find(|s| s.id == id)
    }

    pub fn background_electrons(&self) -> f64 {
        self.background_electrons
    }

    /// Sorted set of species ids that appear on atoms.
    pub fn combo(&self) -> Vec<SpeciesId> {
        let set: BTreeSet<_> = self.atoms.iter().map(|a| a.species).collect();
        set.into_iter().collect()
    }

    pub fn n_electrons(&self) -> f64 {
        let ions: f64 = self
            .atoms
            .iter()
            .map(|a| self.species(a.species).map_or(0.0, |s| s.z_val))
            .sum();
        ions + self.background_electrons
    }

    /// Number of doubly occupied bands.
    pub fn n_occupied(&self) -> usize {
        (self.n_electrons() / 2.0).round() as usize
    }

    pub fn with_atoms(&self, atoms: Vec<Atom>) -> Result<Self, CrystalError> {
        Self::build(self.cell.clone(), atoms, self.species.clone(), self.background_electrons)
    }

    /// Rigidly shifts every atom by `t`.
    pub fn translated(&self, t: &Vec3) -> Self {
        let mut s = self.clone();
        s.atoms.iter_mut().for_each(|a| a.position += t);
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StructureFile::from(self)).expect("structure serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CrystalError> {
        let file: StructureFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct AtomFile {
    pos: [f64; 3],
    species: SpeciesId,
}

#[derive(Serialize, Deserialize)]
struct StructureFile {
    cell: [[f64; 3]; 3],
    atoms: Vec<AtomFile>,
    species_table: Vec<Species>,
    #[serde(default, skip_serializing_if = "is_zero")]
    background_electrons: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl From<&Structure> for StructureFile {
    fn from(s: &Structure) -> Self {
        StructureFile {
            cell: s.cell.rows(),
            atoms: s
                .atoms
                .iter()
                .map(|a| AtomFile {
                    pos: [a.position.x, a.position.y, a.position.z],
                    species: a.species,
                })
                .collect(),
            species_table: s.species.clone(),
            background_electrons: s.background_electrons,
        }
    }
}

impl TryFrom<StructureFile> for Structure {
    type Error = CrystalError;

    fn try_from(f: StructureFile) -> Result<Self, CrystalError> {
        let atoms = f
            .atoms
            .iter()
            .map(|a| Atom {
                position: Vec3::from(a.pos),
                species: a.species,
            })
            .collect();
        Structure::build(Cell::from_rows(f.cell)?, atoms, f.species_table, f.background_electrons)
    }
}
