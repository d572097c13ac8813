//! Thin wrappers over the LAPACK-backed dense routines used across modules.

use crate::error::Result;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, SVD, UPLO};

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &Array2<f64>) -> Result<Array1<f64>> {
    use ndarray_linalg::EigValsh;
    Ok(a.eigvalsh(UPLO::Lower)?)
}

/// Full symmetric eigendecomposition `A = Q diag(λ) Qᵀ`, eigenvalues ascending.
pub fn symmetric_eigen(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let (vals, vecs) = a.eigh(UPLO::Lower)?;
    Ok((vals, vecs))
}

/// Singular values of a rectangular matrix, descending.
pub fn singular_values(a: &Array2<f64>) -> Result<Array1<f64>> {
    let (_, s, _) = a.svd(false, false)?;
    Ok(s)
}
