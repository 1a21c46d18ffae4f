//! Dense operators on labeled tensor-product spaces.
//!
//! A [`LabeledOperator`] is a square complex matrix together with the ordered
//! list of wires it acts on. The first wire is the most significant digit of
//! the row/column multi-index. Every operation matches wires by label, never
//! by position, so operands may list their wires in different orders.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::CMatrix;

/// Default Hermiticity and positivity tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("wire label {0} appears more than once")]
    DuplicateLabel(usize),
    #[error("wire label {0} is not part of the system")]
    UnknownLabel(usize),
    #[error("wire {label} has dimension {left} on one side and {right} on the other")]
    DimensionMismatch {
        label: usize,
        left: usize,
        right: usize,
    },
    #[error("matrix is {rows}x{cols} but the wire system has dimension {expected}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("wire {0} has dimension zero")]
    ZeroDimension(usize),
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("{0:?} is not a permutation")]
    InvalidPermutation(Vec<usize>),
}

/// Ordered list of `(label, dimension)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WireSystem {
    wires: Vec<(usize, usize)>,
}

impl WireSystem {
    pub fn new(wires: Vec<(usize, usize)>) -> Result<Self, TensorError> {
        let mut seen = HashSet::new();
        for &(label, dim) in &wires {
            if dim == 0 {
                return Err(TensorError::ZeroDimension(label));
            }
            if !seen.insert(label) {
                return Err(TensorError::DuplicateLabel(label));
            }
        }
        Ok(Self { wires })
    }

    /// All wires share dimension `d`.
    pub fn uniform(labels: &[usize], d: usize) -> Result<Self, TensorError> {
        Self::new(labels.iter().map(|&l| (l, d)).collect())
    }

    /// The trivial system with no wires (total dimension 1).
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn wires(&self) -> &[(usize, usize)] {
        &self.wires
    }

    pub fn labels(&self) -> Vec<usize> {
        self.wires.iter().map(|w| w.0).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.wires.iter().map(|w| w.1).collect()
    }

    pub fn len(&self) -> usize {
        self.wires.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wires.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.wires.iter().map(|w| w.1).product()
    }

    pub fn position(&self, label: usize) -> Option<usize> {
        self.wires.iter().position(|w| w.0 == label)
    }

    pub fn dim_of(&self, label: usize) -> Option<usize> {
        self.position(label).map(|p| self.wires[p].1)
    }

    pub fn contains(&self, label: usize) -> bool {
        self.position(label).is_some()
    }

    fn positions(&self, labels: &[usize]) -> Result<Vec<usize>, TensorError> {
        labels
            .iter()
            .map(|&l| self.position(l).ok_or(TensorError::UnknownLabel(l)))
            .collect()
    }
}

/// Splits flat indices of a system into digits.
struct Digits {
    dims: Vec<usize>,
}

impl Digits {
    fn new(dims: Vec<usize>) -> Self {
        Self { dims }
    }

    fn split(&self, mut idx: usize, out: &mut [usize]) {
        for k in (0..self.dims.len()).rev() {
            out[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
    }

    fn join(
        &self,
        digits: impl Iterator<Item = usize>,
        dims: impl Iterator<Item = usize>,
    ) -> usize {
        digits.zip(dims).fold(0, |acc, (x, d)| acc * d + x)
    }

    fn total(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Complex matrix attached to a [`WireSystem`].
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    system: WireSystem,
    matrix: CMatrix,
}

impl LabeledOperator {
    pub fn new(system: WireSystem, matrix: CMatrix) -> Result<Self, TensorError> {
        let expected = system.total_dim();
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(TensorError::ShapeMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected,
            });
        }
        Ok(Self { system, matrix })
    }

    pub fn identity(system: WireSystem) -> Self {
        let n = system.total_dim();
        Self {
            system,
            matrix: CMatrix::identity(n, n),
        }
    }

    pub fn scalar(value: Complex64) -> Self {
        Self {
            system: WireSystem::empty(),
            matrix: CMatrix::from_element(1, 1, value),
        }
    }

    /// Rank-one projector `|v⟩⟨v|`.
    pub fn projector(system: WireSystem, v: &DVector<Complex64>) -> Result<Self, TensorError> {
        Self::new(system, v * v.adjoint())
    }

    pub fn system(&self) -> &WireSystem {
        &self.system
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn labels(&self) -> Vec<usize> {
        self.system.labels()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            system: self.system.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            system: self.system.clone(),
            matrix: &self.matrix * c,
        }
    }

    /// `self + other`, with `other` first brought to this wire order.
    pub fn add(&self, other: &LabeledOperator) -> Result<Self, TensorError> {
        let other = other.reorder(&self.labels())?;
        self.check_same_dims(&other)?;
        Ok(Self {
            system: self.system.clone(),
            matrix: &self.matrix + other.matrix,
        })
    }

    /// `self - other`, with `other` first brought to this wire order.
    pub fn sub(&self, other: &LabeledOperator) -> Result<Self, TensorError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Matrix product on a common wire set.
    pub fn mul(&self, other: &LabeledOperator) -> Result<Self, TensorError> {
        let other = other.reorder(&self.labels())?;
        self.check_same_dims(&other)?;
        Ok(Self {
            system: self.system.clone(),
            matrix: &self.matrix * other.matrix,
        })
    }

    fn check_same_dims(&self, other: &LabeledOperator) -> Result<(), TensorError> {
        for (a, b) in self.system.wires.iter().zip(&other.system.wires) {
            if a.1 != b.1 {
                return Err(TensorError::DimensionMismatch {
                    label: a.0,
                    left: a.1,
                    right: b.1,
                });
            }
        }
        Ok(())
    }

    /// Kronecker product; the result lists this operator's wires first.
    pub fn kron(&self, other: &LabeledOperator) -> Result<Self, TensorError> {
        for &(label, _) in &other.system.wires {
            if self.system.contains(label) {
                return Err(TensorError::DuplicateLabel(label));
            }
        }
        let mut wires = self.system.wires.clone();
        wires.extend_from_slice(&other.system.wires);
        Ok(Self {
            system: WireSystem { wires },
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Traces out the wires in `over`. Tracing every wire gives a 1x1
    /// operator holding the trace.
    pub fn partial_trace(&self, over: &[usize]) -> Result<Self, TensorError> {
        let traced = self.system.positions(over)?;
        let n = self.system.len();
        let kept: Vec<usize> = (0..n).filter(|p| !traced.contains(p)).collect();
        let dims = self.system.dims();
        let digits = Digits::new(dims.clone());
        let total = digits.total();
        let kept_dims: Vec<usize> = kept.iter().map(|&p| dims[p]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&p| dims[p]).collect();
        let out_dim: usize = kept_dims.iter().product();

        let mut kept_idx = vec![0; total];
        let mut traced_idx = vec![0; total];
        let mut buf = vec![0; n];
        for i in 0..total {
            digits.split(i, &mut buf);
            kept_idx[i] = digits.join(kept.iter().map(|&p| buf[p]), kept_dims.iter().copied());
            traced_idx[i] =
                digits.join(traced.iter().map(|&p| buf[p]), traced_dims.iter().copied());
        }
        // Group full indices by their traced part so only matching pairs are
        // visited.
        let traced_total: usize = traced_dims.iter().product();
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); traced_total];
        for i in 0..total {
            groups[traced_idx[i]].push(i);
        }
        let mut out = CMatrix::zeros(out_dim, out_dim);
        for group in &groups {
            for &i in group {
                for &j in group {
                    out[(kept_idx[i], kept_idx[j])] += self.matrix[(i, j)];
                }
            }
        }
        let wires = kept.iter().map(|&p| self.system.wires[p]).collect();
        Ok(Self {
            system: WireSystem { wires },
            matrix: out,
        })
    }

    /// Transposes the wires in `over` in the computational basis.
    pub fn partial_transpose(&self, over: &[usize]) -> Result<Self, TensorError> {
        let flip = self.system.positions(over)?;
        let n = self.system.len();
        let dims = self.system.dims();
        let digits = Digits::new(dims.clone());
        let total = digits.total();
        let mut out = CMatrix::zeros(total, total);
        let mut r = vec![0; n];
        let mut c = vec![0; n];
        for i in 0..total {
            for j in 0..total {
                digits.split(i, &mut r);
                digits.split(j, &mut c);
                for &p in &flip {
                    std::mem::swap(&mut r[p], &mut c[p]);
                }
                let ii = digits.join(r.iter().copied(), dims.iter().copied());
                let jj = digits.join(c.iter().copied(), dims.iter().copied());
                out[(ii, jj)] = self.matrix[(i, j)];
            }
        }
        Ok(Self {
            system: self.system.clone(),
            matrix: out,
        })
    }

    /// The same operator with its wires listed in `order`.
    pub fn reorder(&self, order: &[usize]) -> Result<Self, TensorError> {
        if order.len() != self.system.len() {
            let missing = self
                .labels()
                .into_iter()
                .find(|l| !order.contains(l))
                .or_else(|| order.iter().copied().find(|l| !self.system.contains(*l)))
                .unwrap_or(0);
            return Err(TensorError::UnknownLabel(missing));
        }
        let pos = self.system.positions(order)?;
        if pos.iter().copied().collect::<HashSet<_>>().len() != pos.len() {
            return Err(TensorError::InvalidPermutation(order.to_vec()));
        }
        if pos.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let map = index_map(&self.system.dims(), &pos);
        let total = map.len();
        let mut out = CMatrix::zeros(total, total);
        for i in 0..total {
            for j in 0..total {
                out[(map[i], map[j])] = self.matrix[(i, j)];
            }
        }
        let wires = pos.iter().map(|&p| self.system.wires[p]).collect();
        Ok(Self {
            system: WireSystem { wires },
            matrix: out,
        })
    }

    /// Renames wire `from` to `to`.
    pub fn relabel(&self, from: usize, to: usize) -> Result<Self, TensorError> {
        let p = self
            .system
            .position(from)
            .ok_or(TensorError::UnknownLabel(from))?;
        if from != to && self.system.contains(to) {
            return Err(TensorError::DuplicateLabel(to));
        }
        let mut out = self.clone();
        out.system.wires[p].0 = to;
        Ok(out)
    }

    /// Tensors with the identity on every wire of `target` this operator
    /// lacks, then lists the wires in `target` order.
    pub fn extend_to(&self, target: &WireSystem) -> Result<Self, TensorError> {
        for &(label, dim) in &self.system.wires {
            match target.dim_of(label) {
                None => return Err(TensorError::UnknownLabel(label)),
                Some(td) if td != dim => {
                    return Err(TensorError::DimensionMismatch {
                        label,
                        left: dim,
                        right: td,
                    })
                }
                _ => {}
            }
        }
        let extra: Vec<(usize, usize)> = target
            .wires
            .iter()
            .filter(|w| !self.system.contains(w.0))
            .copied()
            .collect();
        let id = LabeledOperator::identity(WireSystem { wires: extra });
        self.kron(&id)?.reorder(&target.labels())
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Eigenvalues (ascending) and eigenvectors of a Hermitian operator.
    pub fn hermitian_eig(&self, tol: f64) -> Result<(DVector<f64>, CMatrix), TensorError> {
        let dev = self.hermiticity_deviation();
        if dev > tol {
            return Err(TensorError::NotHermitian(dev));
        }
        Ok(qmlearn_sdp::hermitian_eigen(&self.matrix))
    }

    pub fn min_eigenvalue(&self, tol: f64) -> Result<f64, TensorError> {
        let (vals, _) = self.hermitian_eig(tol)?;
        Ok(vals.iter().copied().fold(f64::INFINITY, f64::min))
    }

    /// PSD iff Hermitian within `tol` and the smallest eigenvalue is at
    /// least `-tol`.
    pub fn is_psd(&self, tol: f64) -> Result<bool, TensorError> {
        Ok(self.min_eigenvalue(tol)? >= -tol)
    }

    /// Largest absolute entry of `self - other` after aligning wire order.
    pub fn max_abs_diff(&self, other: &LabeledOperator) -> Result<f64, TensorError> {
        let d = self.sub(other)?;
        Ok(d.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

/// For each flat index in `dims`, the flat index after listing the digits in
/// the order `pos` (new digit k is old digit `pos[k]`).
fn index_map(dims: &[usize], pos: &[usize]) -> Vec<usize> {
    let digits = Digits::new(dims.to_vec());
    let total = digits.total();
    let new_dims: Vec<usize> = pos.iter().map(|&p| dims[p]).collect();
    let mut buf = vec![0; dims.len()];
    (0..total)
        .map(|i| {
            digits.split(i, &mut buf);
            digits.join(pos.iter().map(|&p| buf[p]), new_dims.iter().copied())
        })
        .collect()
}

fn check_permutation(p: &[usize]) -> Result<(), TensorError> {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return Err(TensorError::InvalidPermutation(p.to_vec()));
        }
        seen[x] = true;
    }
    Ok(())
}

/// `T_σ|i⟩ = |σ(i)⟩` on `C^d` with `d = sigma.len()`.
pub fn perm_op(sigma: &[usize]) -> Result<CMatrix, TensorError> {
    check_permutation(sigma)?;
    let d = sigma.len();
    let mut m = CMatrix::zeros(d, d);
    for (i, &s) in sigma.iter().enumerate() {
        m[(s, i)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// Operator on `(C^d)^⊗n` moving the tensor factor at position `w` to
/// position `pi[w]`. Satisfies `W(π)W(τ) = W(π∘τ)`.
pub fn wire_perm_op(pi: &[usize], d: usize) -> Result<CMatrix, TensorError> {
    check_permutation(pi)?;
    let n = pi.len();
    let total = d.pow(n as u32);
    let digits = Digits::new(vec![d; n]);
    let mut m = CMatrix::zeros(total, total);
    let mut buf = vec![0; n];
    let mut out = vec![0; n];
    for i in 0..total {
        digits.split(i, &mut buf);
        for w in 0..n {
            out[pi[w]] = buf[w];
        }
        let j = digits.join(out.iter().copied(), std::iter::repeat(d));
        m[(j, i)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// Unnormalized maximally entangled vector `Σ_n |n⟩|n⟩`.
pub fn omega(d: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(d * d);
    for n in 0..d {
        v[n * d + n] = Complex64::new(1.0, 0.0);
    }
    v
}

/// Computational basis vector `|i⟩` on `C^d`.
pub fn basis(d: usize, i: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(d);
    v[i] = Complex64::new(1.0, 0.0);
    v
}

/// Computational basis vector for a digit string over `C^d`.
pub fn basis_string(d: usize, digits: &[usize]) -> DVector<Complex64> {
    let idx = digits.iter().fold(0, |acc, &x| acc * d + x);
    basis(d.pow(digits.len() as u32), idx)
}

/// Real part of a matrix as `f64` entries; used for real-structured data.
pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// Embeds a real matrix as complex.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}
