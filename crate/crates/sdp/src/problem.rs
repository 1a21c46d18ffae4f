use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{CMatrix, SdpError};

/// Index of a block inside an [`SdpProblem`].
pub type BlockId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct SdpBlock {
    pub name: String,
    pub dim: usize,
}

/// One affine equality `Σ_b Tr[A_b X_b] = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpConstraint {
    pub terms: Vec<(BlockId, CMatrix)>,
    pub rhs: f64,
}

/// A maximization problem over Hermitian PSD blocks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SdpProblem {
    blocks: Vec<SdpBlock>,
    objective: Vec<(BlockId, CMatrix)>,
    constraints: Vec<SdpConstraint>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, name: impl Into<String>, dim: usize) -> BlockId {
        self.blocks.push(SdpBlock {
            name: name.into(),
            dim,
        });
        self.blocks.len() - 1
    }

    /// Adds `Tr[c X_block]` to the objective. Repeated calls accumulate.
    pub fn add_objective(&mut self, block: BlockId, c: CMatrix) {
        self.objective.push((block, c));
    }

    pub fn add_constraint(&mut self, terms: Vec<(BlockId, CMatrix)>, rhs: f64) {
        self.constraints.push(SdpConstraint { terms, rhs });
    }

    pub fn blocks(&self) -> &[SdpBlock] {
        &self.blocks
    }

    pub fn constraints(&self) -> &[SdpConstraint] {
        &self.constraints
    }

    pub fn block_by_name(&self, name: &str) -> Option<BlockId> {
        self.blocks.iter().position(|b| b.name == name)
    }

    pub(crate) fn validate(&self, tol: f64) -> Result<(), SdpError> {
        if self.blocks.is_empty() {
            return Err(SdpError::Empty);
        }
        let check = |block: BlockId, m: &CMatrix| -> Result<(), SdpError> {
            let expected = self
                .blocks
                .get(block)
                .ok_or(SdpError::UnknownBlock { block })?
                .dim;
            if m.nrows() != expected || m.ncols() != expected {
                return Err(SdpError::DimensionMismatch {
                    block,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    expected,
                });
            }
            let deviation = (m - m.adjoint()).camax();
            if deviation > tol * (1.0 + m.camax()) {
                return Err(SdpError::NotHermitian { block, deviation });
            }
            Ok(())
        };
        for (b, c) in &self.objective {
            check(*b, c)?;
        }
        for (k, con) in self.constraints.iter().enumerate() {
            if !con.rhs.is_finite() {
                return Err(SdpError::NonFinite { constraint: k });
            }
            for (b, a) in &con.terms {
                check(*b, a)?;
            }
        }
        Ok(())
    }

    pub(crate) fn objective(&self, x: &[CMatrix]) -> f64 {
        self.objective
            .iter()
            .map(|(b, c)| trace_product(c, &x[*b]))
            .sum()
    }

    pub(crate) fn max_violation(&self, x: &[CMatrix]) -> f64 {
        self.constraints
            .iter()
            .map(|con| {
                let lhs: f64 = con
                    .terms
                    .iter()
                    .map(|(b, a)| trace_product(a, &x[*b]))
                    .sum();
                (lhs - con.rhs).abs()
            })
            .fold(0.0, f64::max)
    }

    fn is_real(&self) -> bool {
        let imag_free = |m: &CMatrix| m.iter().all(|z| z.im.abs() <= 1e-14 * (1.0 + z.re.abs()));
        self.objective.iter().all(|(_, c)| imag_free(c))
            && self
                .constraints
                .iter()
                .all(|con| con.terms.iter().all(|(_, a)| imag_free(a)))
    }

    pub(crate) fn realify(&self) -> Realified {
        let complex = !self.is_real();
        let map = |m: &CMatrix| -> DMatrix<f64> {
            if complex {
                realify_matrix(m)
            } else {
                m.map(|z| z.re)
            }
        };
        let dims: Vec<usize> = self
            .blocks
            .iter()
            .map(|b| if complex { 2 * b.dim } else { b.dim })
            .collect();
        let mut c: Vec<DMatrix<f64>> = dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (b, m) in &self.objective {
            c[*b] += map(m);
        }
        let rows = self
            .constraints
            .iter()
            .map(|con| {
                let mut merged: Vec<(usize, DMatrix<f64>)> = Vec::new();
                for (b, a) in &con.terms {
                    let m = map(a);
                    match merged.iter_mut().find(|(bb, _)| bb == b) {
                        Some((_, acc)) => *acc += m,
                        None => merged.push((*b, m)),
                    }
                }
                merged
            })
            .collect();
        let rhs = self.constraints.iter().map(|c| c.rhs).collect();
        Realified {
            complex,
            problem: RealProblem { dims, c, rows, rhs },
        }
    }
}

/// Real symmetric standard form consumed by the interior point core.
#[derive(Debug, Clone)]
pub(crate) struct RealProblem {
    pub dims: Vec<usize>,
    /// Objective coefficients (maximized).
    pub c: Vec<DMatrix<f64>>,
    /// Sparse rows: `(block, coefficient)` pairs.
    pub rows: Vec<Vec<(usize, DMatrix<f64>)>>,
    pub rhs: Vec<f64>,
}

pub(crate) struct Realified {
    complex: bool,
    pub problem: RealProblem,
}

impl Realified {
    pub fn complexify(&self, x: &[DMatrix<f64>]) -> Vec<CMatrix> {
        x.iter()
            .map(|y| {
                if !self.complex {
                    return y.map(|v| Complex64::new(v, 0.0));
                }
                let n = y.nrows() / 2;
                CMatrix::from_fn(n, n, |r, c| {
                    let re = 0.5 * (y[(r, c)] + y[(r + n, c + n)]);
                    let im = 0.5 * (y[(r + n, c)] - y[(r, c + n)]);
                    Complex64::new(re, im)
                })
            })
            .collect()
    }
}

/// `½ [[Re M, -Im M], [Im M, Re M]]`, so that `Tr[M̂ Ŷ] = Re Tr[M Y]` when
/// `Ŷ` is the (unscaled) realification of `Y`.
fn realify_matrix(m: &CMatrix) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        let v = match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        };
        0.5 * v
    })
}

/// `Re Tr[a b]` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}
