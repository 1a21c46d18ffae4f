//! POVM distance, figures of merit and the λ-mixture structure of
//! replicated POVMs.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::comb::{CombError, DiagonalInstrument, Povm};
use crate::symmetry::classes::string_classes;
use crate::symmetry::haar::{haar_unitary, random_state};
use crate::symmetry::symmetrize;
use crate::tensor::basis_string;
use crate::CMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("POVMs differ in shape: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Comb(#[from] CombError),
    #[error("not of mixture form: off-diagonal {offdiag:.3e}, diagonal spread {spread:.3e}")]
    StructureViolation { offdiag: f64, spread: f64 },
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl Estimate {
    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Self {
            mean,
            std_err: (var / n).sqrt(),
            samples: xs.len(),
        }
    }

    /// `|mean - x|` in units of the standard error.
    pub fn sigma_distance(&self, x: f64) -> f64 {
        (self.mean - x).abs() / self.std_err.max(f64::MIN_POSITIVE)
    }
}

fn check_shapes(p: &Povm, q: &Povm) -> Result<(), MetricsError> {
    if p.len() != q.len() || p.dim() != q.dim() {
        return Err(MetricsError::Mismatch(format!(
            "{} outcomes on C^{} vs {} outcomes on C^{}",
            p.len(),
            p.dim(),
            q.len(),
            q.dim()
        )));
    }
    Ok(())
}

/// `𝒟(P, Q) = Σ_i ∫dψ ⟨ψ|P_i - Q_i|ψ⟩² = Σ_i (Tr[Δ_i]² + Tr[Δ_i²]) / (d(d+1))`.
pub fn povm_distance(p: &Povm, q: &Povm) -> Result<f64, MetricsError> {
    check_shapes(p, q)?;
    let d = p.dim() as f64;
    let total: f64 = p
        .elements
        .iter()
        .zip(&q.elements)
        .map(|(a, b)| {
            let delta = a - b;
            let tr = delta.trace().re;
            let tr2 = (&delta * &delta).trace().re;
            tr * tr + tr2
        })
        .sum();
    Ok(total / (d * (d + 1.0)))
}

/// Estimates `𝒟` by sampling uniformly random pure states.
pub fn povm_distance_monte_carlo<R: Rng + ?Sized>(
    p: &Povm,
    q: &Povm,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate, MetricsError> {
    check_shapes(p, q)?;
    let deltas: Vec<CMatrix> = p
        .elements
        .iter()
        .zip(&q.elements)
        .map(|(a, b)| a - b)
        .collect();
    let xs: Vec<f64> = (0..samples)
        .map(|_| {
            let psi = random_state(p.dim(), rng);
            deltas.iter().map(|m| expectation(m, &psi).powi(2)).sum()
        })
        .collect();
    Ok(Estimate::from_samples(&xs))
}

fn expectation(m: &CMatrix, psi: &DVector<Complex64>) -> f64 {
    (psi.adjoint() * m * psi)[(0, 0)].re
}

/// `F = (1/d) Σ_i ⟨i|G_i|i⟩` of a replicated POVM at `U = I`.
pub fn fidelity_seed(g: &Povm) -> f64 {
    let d = g.dim();
    g.elements
        .iter()
        .enumerate()
        .map(|(i, e)| e[(i, i)].re)
        .sum::<f64>()
        / d as f64
}

/// `F = (1/d) Σ_c n(c) ⟨c|R_c|c⟩` over the relabeling classes `c` of a
/// symmetric instrument.
pub fn fidelity_class_sum(inst: &DiagonalInstrument) -> f64 {
    let d = inst.d();
    string_classes(inst.n_uses() + 1, d)
        .iter()
        .map(|c| {
            let s = basis_string(d, &c.pattern);
            c.multiplicity as f64 * expectation(inst.block(&c.pattern), &s)
        })
        .sum::<f64>()
        / d as f64
}

/// `F` of an arbitrary diagonal instrument, evaluated on its symmetrized
/// equivalent.
pub fn fidelity_f(inst: &DiagonalInstrument) -> Result<f64, MetricsError> {
    let sym = symmetrize(inst);
    let g = sym.replicated_povm(&CMatrix::identity(inst.d(), inst.d()))?;
    Ok(fidelity_seed(&g))
}

/// `λ = (dF - 1)/(d - 1)`.
pub fn lambda_from_f(f: f64, d: usize) -> f64 {
    let d = d as f64;
    (d * f - 1.0) / (d - 1.0)
}

/// `D = d/(d²-1) (1-F)²`.
pub fn figure_of_merit_d(f: f64, d: usize) -> f64 {
    let d = d as f64;
    d / (d * d - 1.0) * (1.0 - f).powi(2)
}

/// Haar average of `𝒟(E^(U), G^(U))`, for instruments without covariance.
pub fn figure_of_merit_d_monte_carlo<R: Rng + ?Sized>(
    inst: &DiagonalInstrument,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate, MetricsError> {
    let xs = (0..samples)
        .map(|_| {
            let u = haar_unitary(inst.d(), rng);
            let g = inst.replicated_povm(&u)?;
            povm_distance(&Povm::von_neumann(&u), &g)
        })
        .collect::<Result<Vec<f64>, MetricsError>>()?;
    Ok(Estimate::from_samples(&xs))
}

/// `G_i = λ|i⟩⟨i| + (1-λ) I/d` read off a `U = I` replicated POVM.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureDecomposition {
    pub lambda: f64,
    /// `max |⟨k|G_i|l⟩|` over `k ≠ l`.
    pub offdiag_residual: f64,
    /// Spread of `⟨i|G_i|i⟩` over `i` and of `⟨k|G_i|k⟩` over `k ≠ i`.
    pub diag_spread: f64,
    /// `⟨i|G_i|i⟩` for every outcome.
    pub per_outcome_diag: Vec<f64>,
}

fn spread(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// Extracts `λ`; fails when off-diagonals or diagonal disagreements exceed
/// `tol`, which means the instrument was not symmetric.
pub fn mixture_decompose(g: &Povm, tol: f64) -> Result<MixtureDecomposition, MetricsError> {
    let d = g.dim();
    let mut offdiag: f64 = 0.0;
    for e in &g.elements {
        for k in 0..d {
            for l in 0..d {
                if k != l {
                    offdiag = offdiag.max(e[(k, l)].norm());
                }
            }
        }
    }
    let per_outcome_diag: Vec<f64> = (0..g.len()).map(|i| g.elements[i][(i, i)].re).collect();
    let other = (0..g.len()).flat_map(|i| {
        (0..d)
            .filter(move |&k| k != i)
            .map(move |k| g.elements[i][(k, k)].re)
    });
    let diag_spread = spread(per_outcome_diag.iter().copied()).max(spread(other));
    if offdiag > tol || diag_spread > tol {
        return Err(MetricsError::StructureViolation {
            offdiag,
            spread: diag_spread,
        });
    }
    let mean = per_outcome_diag.iter().sum::<f64>() / per_outcome_diag.len() as f64;
    Ok(MixtureDecomposition {
        lambda: (d as f64 * mean - 1.0) / (d as f64 - 1.0),
        offdiag_residual: offdiag,
        diag_spread,
        per_outcome_diag,
    })
}

/// Random `m`-outcome POVM on `C^d`: `P_i = B^{-1/2} A_i B^{-1/2}` with
/// Wishart `A_i` and `B = Σ A_i`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Povm {
    let parts: Vec<CMatrix> = (0..m)
        .map(|_| crate::symmetry::haar::random_psd(d, rng))
        .collect();
    let total = parts.iter().fold(CMatrix::zeros(d, d), |acc, p| acc + p);
    let norm = crate::linalg::psd_power(&total, -0.5, 1e-14);
    Povm {
        elements: parts.iter().map(|p| &norm * p * &norm).collect(),
    }
}
