//! Seeded random matrices: Haar unitaries, Ginibre matrices, random states.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::CMatrix;

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Haar-distributed `d x d` unitary drawn from `rng`.
///
/// QR of a Ginibre matrix with the phases of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let z = ginibre(d, d, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 {
            rkk / rkk.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for row in 0..d {
            q[(row, k)] *= phase;
        }
    }
    q
}

/// Haar unitary determined by `seed`.
pub fn haar_random_unitary(d: usize, seed: u64) -> CMatrix {
    haar_unitary(d, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Uniformly distributed pure state on `C^d`.
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<Complex64> {
    let g = ginibre(d, 1, rng);
    let v = DVector::from_iterator(d, g.iter().copied());
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Random positive definite matrix `G G†` with Ginibre `G`.
pub fn random_psd<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    &g * g.adjoint()
}

/// Random Hermitian matrix with unit Frobenius norm.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let n = h.norm();
    h / Complex64::new(n, 0.0)
}
