//! Symmetric eigendecomposition helpers shared by the solver and trainer.

use nalgebra::{DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::tensor::Matrix;

const EIGEN_MAX_SWEEPS: usize = 10_000;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: DVector<f64>,
    /// Eigenvectors stored as columns, aligned with `values`.
    pub vectors: Matrix,
}

/// `(m + m^T) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Eigendecomposition of the symmetric part of `m`.
pub fn sym_eigen(m: &Matrix) -> Result<SymEigen> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let sym = symmetrize(m);
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, EIGEN_MAX_SWEEPS).ok_or(Error::EigenFailure)?;
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SymEigen { values, vectors })
}

/// `V diag(values) V^T`, exactly symmetrized.
pub fn reconstruct(vectors: &Matrix, values: &[f64]) -> Matrix {
    let n = vectors.nrows();
    let mut out = Matrix::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        if lam == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out.ger(lam, &v, &v, 1.0);
    }
    symmetrize(&out)
}

/// Largest eigenvalue of the symmetric part of `m`.
pub fn max_eigenvalue(m: &Matrix) -> Result<f64> {
    Ok(sym_eigen(m)?.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// Nuclear norm of a symmetric matrix (sum of absolute eigenvalues).
pub fn nuclear_norm_sym(m: &Matrix) -> Result<f64> {
    Ok(sym_eigen(m)?.values.iter().map(|v| v.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_descending_and_reconstructs() {
        let m = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, -1.0]);
        let e = sym_eigen(&m).unwrap();
        assert!(e.values[0] >= e.values[1] && e.values[1] >= e.values[2]);
        let back = reconstruct(&e.vectors, e.values.as_slice());
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn non_finite_input_fails() {
        let m = Matrix::from_element(2, 2, f64::NAN);
        assert!(matches!(sym_eigen(&m), Err(Error::EigenFailure)));
    }
}
