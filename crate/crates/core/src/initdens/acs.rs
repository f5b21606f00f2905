use super::{AtomicDensityTable, InitError};
use crate::crystal::{for_each_image, DensityField, Grid, Structure};

/// ρ₀(r) = Σ_i ρ_{Z_i}(|r − R_i|) over atoms and their periodic images,
/// renormalized to the structure's electron count.
///
/// Contributions at each point are summed in sorted order, so the result
/// does not depend on atom order.
pub fn acs_density(structure: &Structure, table: &AtomicDensityTable, grid: &Grid) -> Result<DensityField, InitError> {
    let radial: Vec<_> = structure
        .atoms()
        .iter()
        .map(|a| table.get(a.species).ok_or(InitError::TableMiss(a.species)).map(|d| (a.position, d)))
        .collect::<Result<_, _>>()?;
    let cell = structure.cell();
    let mut terms = Vec::new();
    let values: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let p = grid.point(idx);
            terms.clear();
            for (pos, density) in &radial {
                for_each_image(cell, &p, pos, density.outer_radius(), |d, _| {
                    let v = density.eval(d);
                    if v > 0.0 {
                        terms.push(v);
                    }
                });
            }
            terms.sort_by(f64::total_cmp);
            terms.iter().sum()
        })
        .collect();
    let field = DensityField::new(grid.clone(), values).map_err(|e| InitError::Format(e.to_string()))?;
    Ok(field.normalized_to(structure.n_electrons()))
}
