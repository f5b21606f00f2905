use super::radial::radial_integral;
use super::{InitError, RadialDensity};
use crate::crystal::{fft_forward, Atom, Cell, DensityField, Grid, Species, SpeciesId, Structure, Vec3};
use crate::solver::{run_scf, SolverParams};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

/// Side of the cubic box an isolated atom is solved in (bohr).
pub const ATOM_CELL_SIDE: f64 = 20.0;
pub const TABLE_POINTS: usize = 2000;
pub const TABLE_OUTER_RADIUS: f64 = 10.0;
/// The tail is smoothly switched off between this radius and the outer radius.
const TAPER_START: f64 = 8.0;

/// Radial atomic densities keyed by species id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AtomicDensityTable {
    entries: BTreeMap<SpeciesId, (Species, RadialDensity)>,
}

impl AtomicDensityTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, species: Species, density: RadialDensity) {
        self.entries.insert(species.id, (species, density));
    }

    pub fn get(&self, id: SpeciesId) -> Option<&RadialDensity> {
        self.entries.get(&id).map(|(_, d)| d)
    }

    pub fn species(&self) -> impl Iterator<Item = &Species> {
        self.entries.values().map(|(s, _)| s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Builds one entry per species (in parallel).
    pub fn build(species: &[Species], params: &SolverParams) -> Result<Self, InitError> {
        use rayon::prelude::*;
        let built: Vec<_> = species
            .par_iter()
            .map(|s| build_atomic_table(s, params).map(|d| (*s, d)))
            .collect::<Result<_, _>>()?;
        let mut table = Self::new();
        for (s, d) in built {
            table.insert(s, d);
        }
        Ok(table)
    }

    /// Writes `species_<id>.csv` files plus `index.json` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), InitError> {
        fs::create_dir_all(dir)?;
        let mut index = Vec::new();
        for (species, density) in self.entries.values() {
            let file = format!("species_{}.csv", species.id);
            let mut w = csv::Writer::from_path(dir.join(&file)).map_err(|e| InitError::Format(e.to_string()))?;
            w.write_record(["r_bohr", "rho"]).map_err(|e| InitError::Format(e.to_string()))?;
            for (r, v) in density.radii().iter().zip(density.values()) {
                w.write_record([format!("{r:.16e}"), format!("{v:.16e}")])
                    .map_err(|e| InitError::Format(e.to_string()))?;
            }
            w.flush()?;
            index.push(IndexEntry {
                id: species.id,
                z_val: species.z_val,
                sigma: species.sigma,
                file,
            });
        }
        let text = serde_json::to_string_pretty(&TableIndex { species: index })
            .map_err(|e| InitError::Format(e.to_string()))?;
        fs::write(dir.join("index.json"), text)?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self, InitError> {
        let text = fs::read_to_string(dir.join("index.json"))?;
        let index: TableIndex = serde_json::from_str(&text).map_err(|e| InitError::Format(e.to_string()))?;
        let mut table = Self::new();
        for e in index.species {
            let species = Species::new(e.id, e.z_val, e.sigma).map_err(|e| InitError::Format(e.to_string()))?;
            let mut rdr = csv::Reader::from_path(dir.join(&e.file)).map_err(|e| InitError::Format(e.to_string()))?;
            let headers = rdr.headers().map_err(|e| InitError::Format(e.to_string()))?;
            if headers != vec!["r_bohr", "rho"] {
                return Err(InitError::Format(format!("{}: bad header", e.file)));
            }
            let (mut r, mut rho) = (Vec::new(), Vec::new());
            for rec in rdr.records() {
                let rec = rec.map_err(|e| InitError::Format(e.to_string()))?;
                let parse = |s: &str| s.parse::<f64>().map_err(|_| InitError::Format(format!("{}: bad number {s}", e.file)));
                r.push(parse(&rec[0])?);
                rho.push(parse(&rec[1])?);
            }
            if r.len() < 2 || r.windows(2).any(|w| w[1] <= w[0]) {
                return Err(InitError::Format(format!("{}: radii must ascend", e.file)));
            }
            table.insert(species, RadialDensity::new(r, rho));
        }
        Ok(table)
    }
}

#[derive(Serialize, Deserialize)]
struct IndexEntry {
    id: SpeciesId,
    z_val: f64,
    sigma: f64,
    file: String,
}

#[derive(Serialize, Deserialize)]
struct TableIndex {
    species: Vec<IndexEntry>,
}

fn taper(r: f64) -> f64 {
    if r <= TAPER_START {
        1.0
    } else if r >= TABLE_OUTER_RADIUS {
        0.0
    } else {
        0.5 * (1.0 + (PI * (r - TAPER_START) / (TABLE_OUTER_RADIUS - TAPER_START)).cos())
    }
}

/// Solves an isolated atom of `species` at the centre of a cubic box and
/// returns its spherically averaged density, normalized to z_val.
pub fn build_atomic_table(species: &Species, params: &SolverParams) -> Result<RadialDensity, InitError> {
    let fail = |reason: String| InitError::TableBuild {
        species: species.id,
        reason,
    };
    let cell = Cell::cubic(ATOM_CELL_SIDE).map_err(|e| fail(e.to_string()))?;
    let centre = Vec3::repeat(0.5 * ATOM_CELL_SIDE);
    let structure = Structure::from_cell(
        cell.clone(),
        vec![Atom {
            position: centre,
            species: species.id,
        }],
        vec![*species],
    )
    .map_err(|e| fail(e.to_string()))?;
    let params = SolverParams {
        extra_bands: 0,
        ..*params
    };
    let grid = Grid::for_cutoff(&cell, params.ecutrho);
    let width = 1.0f64;
    let guess: Vec<f64> = (0..grid.len())
        .map(|i| {
            let d = crate::crystal::min_image_distance(&cell, &grid.point(i), &centre);
            (-0.5 * d * d / (width * width)).exp()
        })
        .collect();
    let guess = DensityField::new(grid, guess)
        .map_err(|e| fail(e.to_string()))?
        .normalized_to(species.z_val);
    let outcome = run_scf(&structure, &guess, &params).map_err(|e| fail(e.to_string()))?;
    if !outcome.trace.converged {
        return Err(fail(format!(
            "atom SCF did not converge in {} iterations",
            outcome.trace.len()
        )));
    }
    let radii: Vec<f64> = (0..TABLE_POINTS)
        .map(|i| TABLE_OUTER_RADIUS * i as f64 / (TABLE_POINTS - 1) as f64)
        .collect();
    let mut rho = spherical_average(&outcome.density, &centre, &radii);
    for (v, r) in rho.iter_mut().zip(&radii) {
        *v = (*v * taper(*r)).max(0.0);
    }
    let total = radial_integral(&radii, &rho);
    if !(total > 0.0) {
        return Err(fail("spherical average has no charge".into()));
    }
    let s = species.z_val / total;
    rho.iter_mut().for_each(|v| *v *= s);
    Ok(RadialDensity::new(radii, rho))
}

/// Exact spherical average of a band-limited periodic field about `centre`:
/// ρ̄(r) = Σ_G ρ(G) e^{iG·R} sin(|G|r)/(|G|r).
fn spherical_average(field: &DensityField, centre: &Vec3, radii: &[f64]) -> Vec<f64> {
    let spec = fft_forward(field);
    let grid = field.grid();
    let cell = grid.cell();
    let mut terms: Vec<(f64, f64)> = spec
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(idx, c)| {
            let g = cell.gvector(grid.frequency(idx));
            let phase = num_complex::Complex64::from_polar(1.0, g.dot(centre));
            (g.norm(), (c * phase).re)
        })
        .collect();
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut shells: Vec<(f64, f64)> = Vec::new();
    for (g, v) in terms {
        match shells.last_mut() {
            Some((gs, acc)) if (g - *gs).abs() <= 1e-10 * g.max(1.0) => *acc += v,
            _ => shells.push((g, v)),
        }
    }
    radii
        .iter()
        .map(|&r| {
            shells
                .iter()
                .map(|&(g, v)| {
                    let x = g * r;
                    if x < 1e-8 {
                        v
                    } else {
                        v * x.sin() / x
                    }
                })
                .sum()
        })
        .collect()
}
