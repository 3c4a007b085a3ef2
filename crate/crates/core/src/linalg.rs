//! Dense Hermitian linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

/// Largest entry magnitude of `m - m†`.
pub fn hermiticity_residual(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entry magnitude.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

/// Largest entry magnitude of the restriction to rows and columns `keep`.
pub fn max_abs_on(m: &DMatrix<C64>, keep: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for &j in keep {
        for &i in keep {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

/// Spectral decomposition of a Hermitian matrix: `m = Q diag(λ) Q†` with
/// real eigenvalues sorted ascending.
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// Decompose `m`, which must be Hermitian up to `tol` (absolute, per
    /// entry). The matrix is symmetrized before factorization so that
    /// round-off asymmetry cannot leak into the eigenbasis.
    pub fn new(m: &DMatrix<C64>, tol: f64) -> Result<Self> {
        let resid = hermiticity_residual(m);
        if resid > tol {
            return Err(Error::Consistency(format!(
                "matrix is not Hermitian: max |M - M†| = {resid:.3e} > {tol:.3e}"
            )));
        }
        let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        // Sort ascending for reproducibility.
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = DMatrix::zeros(m.nrows(), m.ncols());
        for (new_col, &old_col) in order.iter().enumerate() {
            vectors.set_column(new_col, &eig.eigenvectors.column(old_col));
        }
        Ok(HermitianEigen { values, vectors })
    }

    /// Unitary `exp(-i t M) = Q diag(e^{-i t λ}) Q†`.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for j in 0..scaled.ncols() {
            let phase = C64::from_polar(1.0, -self.values[j] * t);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= phase;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// Transform an operator into the eigenbasis: `Q† A Q`.
    pub fn to_eigenbasis(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        self.vectors.adjoint() * a * &self.vectors
    }

    /// Transform an operator back from the eigenbasis: `Q A Q†`.
    pub fn from_eigenbasis(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        &self.vectors * a * self.vectors.adjoint()
    }

    /// Heisenberg evolution of an operator already expressed in the
    /// eigenbasis: `(e^{iMs} A e^{-iMs})_{jk} = e^{i(λ_j - λ_k)s} A_{jk}`.
    /// Entrywise, so repeated time samples are cheap.
    pub fn evolve_in_eigenbasis(&self, a_eig: &DMatrix<C64>, s: f64) -> DMatrix<C64> {
        let n = a_eig.nrows();
        let mut out = a_eig.clone();
        for j in 0..n {
            for i in 0..n {
                out[(i, j)] *= C64::from_polar(1.0, (self.values[i] - self.values[j]) * s);
            }
        }
        out
    }
}

/// `‖U†U - 1‖` (largest entry magnitude): deviation from unitarity.
pub fn unitarity_residual(u: &DMatrix<C64>) -> f64 {
    let mut g = u.adjoint() * u;
    for i in 0..g.nrows() {
        g[(i, i)] -= C64::new(1.0, 0.0);
    }
    max_abs(&g)
}
