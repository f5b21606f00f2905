use super::{DensityField, Grid};
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

/// Unnormalized 3-D complex FFT over the canonical grid layout.
///
/// `forward` computes Σ_r x(r)e^{-iG·r}; `inverse` computes Σ_G x(G)e^{+iG·r}.
pub struct Fft3 {
    dims: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("dims", &self.dims).finish()
    }
}

impl Fft3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.map(|n| planner.plan_fft(n, FftDirection::Forward));
        let inverse = dims.map(|n| planner.plan_fft(n, FftDirection::Inverse));
        Fft3 {
            dims,
            forward,
            inverse,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let [n1, n2, n3] = self.dims;
        assert_eq!(data.len(), n1 * n2 * n3, "fft buffer length");
        plans[0].process(data);

        let mut line = vec![Complex64::default(); n2.max(n3)];
        for i3 in 0..n3 {
            for i1 in 0..n1 {
                let base = i1 + n1 * n2 * i3;
                for i2 in 0..n2 {
                    line[i2] = data[base + n1 * i2];
                }
                plans[1].process(&mut line[..n2]);
                for i2 in 0..n2 {
                    data[base + n1 * i2] = line[i2];
                }
            }
        }
        let plane = n1 * n2;
        for p in 0..plane {
            for i3 in 0..n3 {
                line[i3] = data[p + plane * i3];
            }
            plans[2].process(&mut line[..n3]);
            for i3 in 0..n3 {
                data[p + plane * i3] = line[i3];
            }
        }
    }
}

/// Fourier coefficients of a grid field, stored in FFT bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(grid.len(), coeffs.len(), "spectrum length");
        Spectrum { grid, coeffs }
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Spectrum {
            grid,
            coeffs: vec![Complex64::default(); n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, m: [i32; 3]) -> Complex64 {
        self.coeffs[self.grid.miller_index(m)]
    }

    pub fn set(&mut self, m: [i32; 3], v: Complex64) {
        let i = self.grid.miller_index(m);
        self.coeffs[i] = v;
    }
}

/// ρ(G) = (1/J)·Σ_r ρ(r)e^{-iG·r}.
pub fn fft_forward(field: &DensityField) -> Spectrum {
    let grid = field.grid().clone();
    let fft = Fft3::new(grid.dims());
    forward_with(&fft, field)
}

pub(crate) fn forward_with(fft: &Fft3, field: &DensityField) -> Spectrum {
    let grid = field.grid().clone();
    let scale = 1.0 / grid.len() as f64;
    let mut buf: Vec<Complex64> = field
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft.forward(&mut buf);
    buf.iter_mut().for_each(|c| *c *= scale);
    Spectrum::new(grid, buf)
}

/// ρ(r) = Σ_G ρ(G)e^{iG·r}; imaginary parts are discarded.
pub fn fft_inverse(spectrum: &Spectrum) -> DensityField {
    let fft = Fft3::new(spectrum.grid().dims());
    inverse_with(&fft, spectrum)
}

pub(crate) fn inverse_with(fft: &Fft3, spectrum: &Spectrum) -> DensityField {
    let mut buf = spectrum.coeffs().to_vec();
    fft.inverse(&mut buf);
    let values = buf.iter().map(|c| c.re).collect();
    DensityField::new(spectrum.grid().clone(), values).expect("inverse fft of finite spectrum")
}
