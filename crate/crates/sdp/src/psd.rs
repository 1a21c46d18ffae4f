use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::CMatrix;

/// Eigendecomposition of the Hermitian part of `x`.
///
/// Eigenvalues are returned in ascending order with matching eigenvector
/// columns.
pub fn hermitian_eigen(x: &CMatrix) -> (DVector<f64>, CMatrix) {
    let h = (x + x.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = CMatrix::zeros(x.nrows(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues are clipped to
/// zero.
pub fn psd_project(x: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(x);
    let clipped = CMatrix::from_diagonal(&values.map(|v| Complex64::new(v.max(0.0), 0.0)));
    let out = &vectors * clipped * vectors.adjoint();
    (&out + out.adjoint()) * Complex64::new(0.5, 0.0)
}
