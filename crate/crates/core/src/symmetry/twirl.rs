//! Haar twirl as an exact projection onto the commutant of
//! `U^{(*)} ⊗ ... ⊗ U^{(*)}`.
//!
//! The commutant is spanned by the wire-permutation operators, partially
//! transposed on every wire that carries `U*`. The Hilbert-Schmidt Gram
//! matrix of that spanning set is `d^{cycles(π⁻¹τ)}` (partial transposition
//! permutes matrix entries, so it leaves inner products alone).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::haar::haar_unitary;
use super::SymmetryError;
use crate::tensor::{wire_perm_op, LabeledOperator, WireSystem};
use crate::CMatrix;

/// Which wires of a tensor power carry `U*` instead of `U`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepSpec {
    pub d: usize,
    pub conj: Vec<bool>,
}

impl RepSpec {
    pub fn new(d: usize, conj: Vec<bool>) -> Self {
        Self { d, conj }
    }

    /// `U* ⊗ U^⊗N` on the learning wires `[2N, 2N-2, ..., 0]`.
    pub fn learning(n_uses: usize, d: usize) -> Self {
        let mut conj = vec![false; n_uses + 1];
        conj[0] = true;
        Self { d, conj }
    }

    /// `U^⊗k`.
    pub fn plain(k: usize, d: usize) -> Self {
        Self {
            d,
            conj: vec![false; k],
        }
    }

    pub fn n_wires(&self) -> usize {
        self.conj.len()
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.conj.len() as u32)
    }

    /// The representation matrix for `u`.
    pub fn group_element(&self, u: &CMatrix) -> CMatrix {
        let uc = u.conjugate();
        self.conj.iter().fold(CMatrix::identity(1, 1), |acc, &cj| {
            acc.kronecker(if cj { &uc } else { u })
        })
    }

    /// Wire permutations, partially transposed on the conjugated wires, in
    /// lexicographic order of the permutation.
    pub fn spanning_set(&self) -> Vec<CMatrix> {
        let n = self.n_wires();
        let flip: Vec<usize> = (0..n).filter(|&w| self.conj[w]).collect();
        let system =
            WireSystem::uniform(&(0..n).collect::<Vec<_>>(), self.d).expect("distinct labels");
        permutations(n)
            .into_iter()
            .map(|p| {
                let m = wire_perm_op(&p, self.d).expect("valid permutation");
                if flip.is_empty() {
                    m
                } else {
                    LabeledOperator::new(system.clone(), m)
                        .and_then(|op| op.partial_transpose(&flip))
                        .expect("matching dimensions")
                        .into_matrix()
                }
            })
            .collect()
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                cur.push(k);
                go(cur, used, out);
                cur.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Number of cycles of a permutation.
pub fn cycles(p: &[usize]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut count = 0;
    for start in 0..p.len() {
        if !seen[start] {
            count += 1;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = p[k];
            }
        }
    }
    count
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&x| a[x]).collect()
}

/// `Tr[S_π† S_τ] = d^{cycles(π⁻¹τ)}` for the permutations of `n` wires.
pub fn permutation_gram(n: usize, d: usize) -> DMatrix<f64> {
    let perms = permutations(n);
    DMatrix::from_fn(perms.len(), perms.len(), |i, j| {
        (d as f64).powi(cycles(&compose(&inverse(&perms[i]), &perms[j])) as i32)
    })
}

/// Reusable commutant projector for one representation.
#[derive(Debug, Clone)]
pub struct Twirler {
    rep: RepSpec,
    span: Vec<CMatrix>,
    gram_pinv: DMatrix<f64>,
}

impl Twirler {
    pub fn new(rep: RepSpec) -> Self {
        let span = rep.spanning_set();
        let gram = permutation_gram(rep.n_wires(), rep.d);
        let scale = gram.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let gram_pinv = gram
            .pseudo_inverse(1e-10 * scale)
            .expect("non-negative tolerance");
        Self {
            rep,
            span,
            gram_pinv,
        }
    }

    pub fn rep(&self) -> &RepSpec {
        &self.rep
    }

    /// Orthogonal projection of `x` onto the commutant.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let b: Vec<Complex64> = self
            .span
            .iter()
            .map(|s| s.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum())
            .collect();
        let n = self.span.len();
        let dim = x.nrows();
        let mut out = CMatrix::zeros(dim, dim);
        for i in 0..n {
            let ci: Complex64 = (0..n).map(|j| b[j] * self.gram_pinv[(i, j)]).sum();
            out += &self.span[i] * ci;
        }
        out
    }
}

/// Projection of `x` onto the commutant of `rep`.
pub fn twirl_matrix(x: &CMatrix, rep: &RepSpec) -> CMatrix {
    Twirler::new(rep.clone()).apply(x)
}

/// Haar twirl of an operator whose every wire carries `U`, except the
/// wires in `conjugate`, which carry `U*`.
pub fn haar_twirl(
    x: &LabeledOperator,
    conjugate: &[usize],
) -> Result<LabeledOperator, SymmetryError> {
    let dims = x.system().dims();
    let d = *dims
        .first()
        .ok_or(SymmetryError::Unsupported("twirl of a scalar".into()))?;
    if dims.iter().any(|&k| k != d) {
        return Err(SymmetryError::Unsupported(
            "twirl needs equal wire dimensions".into(),
        ));
    }
    for &l in conjugate {
        if !x.system().contains(l) {
            return Err(crate::tensor::TensorError::UnknownLabel(l).into());
        }
    }
    let conj = x.labels().iter().map(|l| conjugate.contains(l)).collect();
    let out = twirl_matrix(x.matrix(), &RepSpec::new(d, conj));
    Ok(LabeledOperator::new(x.system().clone(), out)?)
}

/// Monte Carlo estimate of the twirl from `samples` Haar unitaries.
pub fn haar_twirl_monte_carlo<R: Rng + ?Sized>(
    x: &CMatrix,
    rep: &RepSpec,
    samples: usize,
    rng: &mut R,
) -> CMatrix {
    let mut acc = CMatrix::zeros(x.nrows(), x.ncols());
    for _ in 0..samples {
        let g = rep.group_element(&haar_unitary(rep.d, rng));
        acc += &g * x * g.adjoint();
    }
    acc / Complex64::new(samples as f64, 0.0)
}
