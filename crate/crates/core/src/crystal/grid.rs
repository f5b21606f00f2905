use super::{miller_bounds, Cell, CrystalError, Vec3};

/// Smallest n' ≥ n whose prime factors are all in {2, 3, 5}.
pub fn fft_friendly_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Real-space sampling grid over a cell. Linear index is
/// `i1 + n1·(i2 + n2·i3)` (first axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dims: [usize; 3],
    cell: Cell,
}

impl Grid {
    pub fn new(cell: Cell, dims: [usize; 3]) -> Result<Self, CrystalError> {
        if dims.iter().any(|&d| d == 0) {
            return Err(CrystalError::BadDims(dims));
        }
        Ok(Grid { dims, cell })
    }

    /// Smallest FFT-friendly grid holding every Miller index with ½|G|² ≤ ecutrho.
    pub fn for_cutoff(cell: &Cell, ecutrho: f64) -> Self {
        let bounds = miller_bounds(cell, ecutrho);
        let dims = bounds.map(|b| fft_friendly_size(2 * b as usize + 1));
        Grid {
            dims,
            cell: cell.clone(),
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight Ω/J.
    pub fn weight(&self) -> f64 {
        self.cell.volume() / self.len() as f64
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        i[0] + self.dims[0] * (i[1] + self.dims[1] * i[2])
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let [n1, n2, _] = self.dims;
        [idx % n1, (idx / n1) % n2, idx / (n1 * n2)]
    }

    pub fn fractional(&self, idx: usize) -> Vec3 {
        let c = self.coords(idx);
        Vec3::new(
            c[0] as f64 / self.dims[0] as f64,
            c[1] as f64 / self.dims[1] as f64,
            c[2] as f64 / self.dims[2] as f64,
        )
    }

    pub fn point(&self, idx: usize) -> Vec3 {
        self.cell.to_cartesian(&self.fractional(idx))
    }

    /// Linear index of the FFT bin holding Miller triple `m` (wrapped).
    pub fn miller_index(&self, m: [i32; 3]) -> usize {
        let w = |h: i32, n: usize| h.rem_euclid(n as i32) as usize;
        self.index([w(m[0], self.dims[0]), w(m[1], self.dims[1]), w(m[2], self.dims[2])])
    }

    /// Centred Miller triple of FFT bin `idx`; each component lies in
    /// (-n/2, n/2], the Nyquist bin taking the positive sign.
    pub fn frequency(&self, idx: usize) -> [i32; 3] {
        let c = self.coords(idx);
        let f = |i: usize, n: usize| {
            if i > n / 2 {
                i as i32 - n as i32
            } else {
                i as i32
            }
        };
        [f(c[0], self.dims[0]), f(c[1], self.dims[1]), f(c[2], self.dims[2])]
    }

    /// Whether every component of `m` fits in the grid without wrapping onto
    /// another in-range index.
    pub fn holds(&self, m: [i32; 3]) -> bool {
        m.iter()
            .zip(self.dims)
            .all(|(&h, n)| 2 * h.unsigned_abs() as usize + 1 <= n)
    }
}
