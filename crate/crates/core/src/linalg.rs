//! Small matrix helpers shared across modules.

use num_complex::Complex64;
use qmlearn_sdp::hermitian_eigen;

use crate::CMatrix;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `X^p` for a positive semidefinite `X`; eigenvalues below `floor` are
/// treated as zero (and stay zero for negative `p`).
pub fn psd_power(x: &CMatrix, p: f64, floor: f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(x);
    let scaled = vals.map(|v| if v > floor { v.powf(p) } else { 0.0 });
    let d = CMatrix::from_diagonal(&scaled.map(c));
    &vecs * d * vecs.adjoint()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Partial trace over the most significant tensor factor of dimension `d`.
pub fn trace_first(m: &CMatrix, d: usize) -> CMatrix {
    let rest = m.nrows() / d;
    let mut out = CMatrix::zeros(rest, rest);
    for x in 0..d {
        out += m.view((x * rest, x * rest), (rest, rest));
    }
    out
}

/// `I_d ⊗ m`.
pub fn id_kron(d: usize, m: &CMatrix) -> CMatrix {
    CMatrix::identity(d, d).kronecker(m)
}

/// Hermitian part `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let (vals, _) = hermitian_eigen(m);
    vals[0]
}
