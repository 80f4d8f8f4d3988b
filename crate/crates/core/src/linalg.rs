//! Thin wrappers around the LAPACK-backed dense routines.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::Result;

/// Hermitian eigendecomposition with eigenvectors in columns, ascending
/// eigenvalues.
///
/// `Eigh` on a row-major complex array hands LAPACK the transposed buffer,
/// so the raw output columns diagonalise conj(A); conjugating them recovers
/// the eigenvectors of A itself. Inputs in the default (C-order) layout only.
pub fn eigh_cols(a: &Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    debug_assert!(a.is_standard_layout());
    let (vals, vecs) = a.eigh(UPLO::Lower)?;
    Ok((vals.to_vec(), vecs.mapv(|z| z.conj())))
}
