use super::{HamiltonianOp, SolverError};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

/// Lowest eigenpairs of a Hermitian operator, ascending.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
    /// ‖Hψ − εψ‖₂ per returned pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Kohn-Sham orbitals as plane-wave coefficients (one column per band).
#[derive(Debug, Clone)]
pub struct KsOrbitals {
    pub miller: Arc<Vec<[i32; 3]>>,
    pub coeffs: DMatrix<Complex64>,
    pub eigenvalues: Vec<f64>,
    pub occupations: Vec<f64>,
}

impl KsOrbitals {
    /// Doubly occupies the lowest `n_occupied` bands.
    pub fn aufbau(miller: Arc<Vec<[i32; 3]>>, pairs: &Eigenpairs, n_occupied: usize) -> Self {
        let n = pairs.values.len();
        KsOrbitals {
            miller,
            coeffs: pairs.vectors.clone(),
            eigenvalues: pairs.values.clone(),
            occupations: (0..n).map(|k| if k < n_occupied { 2.0 } else { 0.0 }).collect(),
        }
    }

    pub fn n_bands(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn electron_count(&self) -> f64 {
        self.occupations.iter().sum()
    }

    pub fn band_energy(&self) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.occupations)
            .map(|(e, o)| e * o)
            .sum()
    }

    /// Max |⟨ψ_i|ψ_j⟩ − δ_ij|.
    pub fn orthonormality_error(&self) -> f64 {
        let s = self.coeffs.adjoint() * &self.coeffs;
        let mut worst = 0.0f64;
        for i in 0..s.nrows() {
            for j in 0..s.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

fn residual_norms(h: &impl HamiltonianOp, vectors: &DMatrix<Complex64>, values: &[f64]) -> Vec<f64> {
    let hv = h.apply(vectors);
    (0..values.len())
        .map(|k| (hv.column(k) - vectors.column(k) * Complex64::new(values[k], 0.0)).norm())
        .collect()
}

/// Dense Hermitian diagonalization keeping the lowest `n_bands` pairs,
/// with aufbau occupations for `n_occupied` bands.
pub fn solve_linear_eigenproblem(
    h: &DMatrix<Complex64>,
    miller: Arc<Vec<[i32; 3]>>,
    n_bands: usize,
    n_occupied: usize,
) -> Result<KsOrbitals, SolverError> {
    let pairs = dense_lowest(h, n_bands)?;
    Ok(KsOrbitals::aufbau(miller, &pairs, n_occupied))
}

pub(crate) fn dense_lowest(h: &DMatrix<Complex64>, n_bands: usize) -> Result<Eigenpairs, SolverError> {
    let n = h.nrows();
    if n_bands > n {
        return Err(SolverError::InsufficientBands { needed: n_bands, have: n });
    }
    const MAX_SWEEPS: usize = 10_000;
    let eig = h
        .clone()
        .try_symmetric_eigen(f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| SolverError::Eigen {
            iterations: MAX_SWEEPS,
            residual: f64::NAN,
            message: format!("dense QR iteration on a {n}x{n} matrix did not converge"),
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let keep = &order[..n_bands];
    let values: Vec<f64> = keep.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n_bands);
    for (c, &k) in keep.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(k));
    }
    let residuals = residual_norms(h, &vectors, &values);
    check_residuals(&residuals, 1e-8, 1)?;
    Ok(Eigenpairs {
        values,
        vectors,
        residuals,
        iterations: 1,
    })
}

fn check_residuals(res: &[f64], tol: f64, iterations: usize) -> Result<(), SolverError> {
    let worst = res.iter().copied().fold(0.0, f64::max);
    if !(worst <= tol) {
        return Err(SolverError::Eigen {
            iterations,
            residual: worst,
            message: format!("residual above {tol:e}"),
        });
    }
    Ok(())
}

/// Orthonormalizes `col` against the first `upto` columns of `v` (two passes
/// of modified Gram-Schmidt). Returns the norm that remained before scaling.
fn orthonormalize_into(v: &mut DMatrix<Complex64>, upto: usize, col: usize) -> f64 {
    let start = v.column(col).norm();
    for _ in 0..2 {
        for i in 0..upto {
            let proj = v.column(i).dotc(&v.column(col));
            let ci = v.column(i).clone_owned();
            v.column_mut(col).axpy(-proj, &ci, Complex64::new(1.0, 0.0));
        }
    }
    let norm = v.column(col).norm();
    if norm > 0.0 {
        v.column_mut(col).scale_mut(1.0 / norm);
    }
    if start > 0.0 {
        norm / start
    } else {
        0.0
    }
}

/// Block Davidson for the lowest `n_converge` eigenpairs of `h`, iterating a
/// block as wide as `guess`. Extra guess columns act as a buffer and are
/// returned unconverged.
pub fn davidson(
    h: &impl HamiltonianOp,
    guess: &DMatrix<Complex64>,
    n_converge: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Eigenpairs, SolverError> {
    let n = h.dim();
    let m = guess.ncols();
    assert!(n_converge <= m, "block narrower than requested pairs");
    if m > n {
        return Err(SolverError::InsufficientBands { needed: m, have: n });
    }
    let diag = h.diagonal();
    let max_basis = (4 * m).max(m + 8).min(n);

    let mut basis = DMatrix::<Complex64>::zeros(n, max_basis);
    let mut width = 0;
    for c in 0..m {
        basis.set_column(width, &guess.column(c));
        if orthonormalize_into(&mut basis, width, width) > 1e-8 {
            width += 1;
        }
    }
    // Fill collapsed guess columns with unit vectors on the lowest diagonal entries.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    let mut next_unit = 0;
    while width < m {
        let mut e = nalgebra::DVector::<Complex64>::zeros(n);
        e[order[next_unit]] = Complex64::new(1.0, 0.0);
        next_unit += 1;
        basis.set_column(width, &e);
        if orthonormalize_into(&mut basis, width, width) > 1e-8 {
            width += 1;
        }
    }
    let mut hbasis = DMatrix::<Complex64>::zeros(n, max_basis);
    hbasis.columns_mut(0, width).copy_from(&h.apply(&basis.columns(0, width).into_owned()));

    let mut last_worst = f64::INFINITY;
    for iter in 1..=max_iter {
        let v = basis.columns(0, width);
        let hv = hbasis.columns(0, width);
        let mut s = v.adjoint() * hv;
        let sh = s.adjoint();
        s = (s + sh) * Complex64::new(0.5, 0.0);
        let eig = s.symmetric_eigen();
        let mut order: Vec<usize> = (0..width).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        let mut y = DMatrix::<Complex64>::zeros(width, m);
        let mut theta = vec![0.0; m];
        for (c, &k) in order.iter().take(m).enumerate() {
            y.set_column(c, &eig.eigenvectors.column(k));
            theta[c] = eig.eigenvalues[k];
        }
        let x = v * &y;
        let hx = hv * &y;
        let mut r = hx.clone();
        for c in 0..m {
            let xc = x.column(c).clone_owned();
            r.column_mut(c).axpy(Complex64::new(-theta[c], 0.0), &xc, Complex64::new(1.0, 0.0));
        }
        let norms: Vec<f64> = (0..m).map(|c| r.column(c).norm()).collect();
        last_worst = norms[..n_converge].iter().copied().fold(0.0, f64::max);
        if last_worst <= tol {
            return Ok(Eigenpairs {
                values: theta,
                vectors: x,
                residuals: norms,
                iterations: iter,
            });
        }
        let pending: Vec<usize> = (0..m).filter(|&c| norms[c] > tol).collect();
        if width + pending.len() > max_basis {
            basis.columns_mut(0, m).copy_from(&x);
            width = 0;
            for c in 0..m {
                if c != width {
                    let col = basis.column(c).clone_owned();
                    basis.set_column(width, &col);
                }
                if orthonormalize_into(&mut basis, width, width) > 1e-8 {
                    width += 1;
                }
            }
            hbasis.columns_mut(0, width).copy_from(&h.apply(&basis.columns(0, width).into_owned()));
        }
        let first_new = width;
        for &c in &pending {
            if width == max_basis {
                break;
            }
            let mut t = r.column(c).clone_owned();
            for (i, ti) in t.iter_mut().enumerate() {
                let mut d = diag[i] - theta[c];
                if d.abs() < 0.1 {
                    d = if d < 0.0 { -0.1 } else { 0.1 };
                }
                *ti /= d;
            }
            basis.set_column(width, &t);
            if orthonormalize_into(&mut basis, width, width) > 1e-10 {
                width += 1;
            }
        }
        if width == first_new {
            return Err(SolverError::Eigen {
                iterations: iter,
                residual: last_worst,
                message: "davidson subspace stopped growing".into(),
            });
        }
        let fresh = basis.columns(first_new, width - first_new).into_owned();
        hbasis.columns_mut(first_new, width - first_new).copy_from(&h.apply(&fresh));
    }
    Err(SolverError::Eigen {
        iterations: max_iter,
        residual: last_worst,
        message: "davidson hit the iteration cap".into(),
    })
}

/// Lowest unoccupied minus highest occupied eigenvalue.
pub fn band_gap(orbitals: &KsOrbitals) -> Result<f64, SolverError> {
    let occupied: Vec<usize> = (0..orbitals.n_bands()).filter(|&k| orbitals.occupations[k] > 0.0).collect();
    let empty: Vec<usize> = (0..orbitals.n_bands()).filter(|&k| orbitals.occupations[k] == 0.0).collect();
    if empty.is_empty() || occupied.is_empty() {
        return Err(SolverError::InsufficientBands {
            needed: occupied.len() + 1,
            have: orbitals.n_bands(),
        });
    }
    let homo = occupied.iter().map(|&k| orbitals.eigenvalues[k]).fold(f64::NEG_INFINITY, f64::max);
    let lumo = empty.iter().map(|&k| orbitals.eigenvalues[k]).fold(f64::INFINITY, f64::min);
    let gap = lumo - homo;
    if gap < 0.0 {
        return Err(SolverError::NonAufbau(gap));
    }
    Ok(gap)
}
