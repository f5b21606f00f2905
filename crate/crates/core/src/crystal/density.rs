use super::{CrystalError, Grid};

/// Real scalar field on a grid (electrons/bohr³), canonical layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Grid,
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, CrystalError> {
        if values.len() != grid.len() {
            return Err(CrystalError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CrystalError::NonFinite(i));
        }
        Ok(DensityField { grid, values })
    }

    pub fn uniform(grid: Grid, value: f64) -> Self {
        let n = grid.len();
        DensityField {
            grid,
            values: vec![value; n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// ∫ρ dr by the grid quadrature (Ω/J)·Σρ.
    pub fn integral(&self) -> f64 {
        self.grid.weight() * self.values.iter().sum::<f64>()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rescales so that the integral equals `electrons`. Leaves the field
    /// untouched when the current integral is zero.
    pub fn normalized_to(mut self, electrons: f64) -> Self {
        let total = self.integral();
        if total != 0.0 {
            let s = electrons / total;
            self.values.iter_mut().for_each(|v| *v *= s);
        }
        self
    }

    pub fn same_grid(&self, other: &DensityField) -> bool {
        self.grid == other.grid
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DensityField {
        DensityField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}
