use crate::crystal::{gvectors_within, Cell, Grid};

/// Plane waves with ½|G|² ≤ ecutwfc and their FFT-bin positions.
#[derive(Debug, Clone)]
pub struct PwBasis {
    miller: Vec<[i32; 3]>,
    kinetic: Vec<f64>,
    grid_index: Vec<usize>,
}

impl PwBasis {
    pub fn new(cell: &Cell, ecutwfc: f64, grid: &Grid) -> Self {
        let gs = gvectors_within(cell, ecutwfc);
        PwBasis {
            miller: gs.iter().map(|g| g.miller).collect(),
            kinetic: gs.iter().map(|g| g.kinetic()).collect(),
            grid_index: gs.iter().map(|g| grid.miller_index(g.miller)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.miller.len()
    }

    pub fn is_empty(&self) -> bool {
        self.miller.is_empty()
    }

    pub fn miller(&self) -> &[[i32; 3]] {
        &self.miller
    }

    pub fn kinetic(&self) -> &[f64] {
        &self.kinetic
    }

    pub fn grid_index(&self) -> &[usize] {
        &self.grid_index
    }
}
