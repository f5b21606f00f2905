use super::{CrystalError, Mat3, Vec3};
use std::f64::consts::PI;

/// Reciprocal lattice `B` of a lattice matrix, defined by `Bᵀ·cell = I`.
///
/// The rows of `B` are the reciprocal vectors without the 2π factor, so a
/// Miller triple `m` maps to `G = 2π·Bᵀm`.
pub fn reciprocal_lattice(cell: &Mat3) -> Result<Mat3, CrystalError> {
    let det = cell.determinant();
    let scale = cell.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if !det.is_finite() || det.abs() <= 1e-12 * scale.powi(3) || scale == 0.0 {
        return Err(CrystalError::DegenerateCell(det));
    }
    let inv = cell.try_inverse().ok_or(CrystalError::DegenerateCell(det))?;
    Ok(inv.transpose())
}

/// Right-handed periodic cell with cached reciprocal lattice and volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    lattice: Mat3,
    reciprocal: Mat3,
    volume: f64,
}

impl Cell {
    pub fn new(lattice: Mat3) -> Result<Self, CrystalError> {
        let reciprocal = reciprocal_lattice(&lattice)?;
        let det = lattice.determinant();
        if det <= 0.0 {
            return Err(CrystalError::LeftHandedCell(det));
        }
        Ok(Cell {
            lattice,
            reciprocal,
            volume: det,
        })
    }

    pub fn cubic(a: f64) -> Result<Self, CrystalError> {
        Self::new(Mat3::identity() * a)
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self, CrystalError> {
        Self::new(Mat3::from_fn(|i, j| rows[i][j]))
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.lattice;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn lattice(&self) -> &Mat3 {
        &self.lattice
    }

    pub fn reciprocal(&self) -> &Mat3 {
        &self.reciprocal
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Lattice vector `i` (a row of the lattice matrix).
    pub fn vector(&self, i: usize) -> Vec3 {
        self.lattice.row(i).transpose()
    }

    pub fn to_fractional(&self, r: &Vec3) -> Vec3 {
        self.reciprocal * r
    }

    pub fn to_cartesian(&self, f: &Vec3) -> Vec3 {
        self.lattice.transpose() * f
    }

    /// Cartesian reciprocal vector for a Miller triple.
    pub fn gvector(&self, m: [i32; 3]) -> Vec3 {
        let mv = Vec3::new(m[0] as f64, m[1] as f64, m[2] as f64);
        self.reciprocal.transpose() * mv * (2.0 * PI)
    }

    /// Distance between adjacent lattice planes spanned by the other two vectors.
    pub fn plane_spacing(&self, i: usize) -> f64 {
        1.0 / self.reciprocal.row(i).norm()
    }

    /// Radius of the largest sphere that fits inside the cell.
    pub fn inscribed_radius(&self) -> f64 {
        0.5 * (0..3)
            .map(|i| self.plane_spacing(i))
            .fold(f64::INFINITY, f64::min)
    }

    /// Wraps a Cartesian position into the cell (fractional coordinates in [0, 1)).
    pub fn wrap(&self, r: &Vec3) -> Vec3 {
        let f = self.to_fractional(r).map(|x| x - x.floor());
        self.to_cartesian(&f)
    }
}
