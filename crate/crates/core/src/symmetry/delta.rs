//! `Δ^ν_c = Tr_{H_ν}[(P^ν ⊗ I)|c⟩⟨c|]` for a representative basis string
//! `c` of each relabeling class.

use super::blocks::BlockDecomposition;
use super::classes::string_classes;
use super::SymmetryError;
use crate::linalg::c;
use crate::tensor::basis_string;
use crate::CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaEntry {
    /// Class pattern in letter form, e.g. `xyx`.
    pub class: String,
    pub irrep: String,
    /// `m_ν x m_ν` matrix (1x1 for multiplicity-free irreps).
    pub value: CMatrix,
}

fn scalar(x: f64) -> CMatrix {
    CMatrix::from_element(1, 1, c(x))
}

fn mat2(a: f64, b: f64, cc: f64, dd: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(a), c(b), c(cc), c(dd)])
}

/// Closed-form table for `N = 1` (irreps `p`, `q`) and `N = 2` (irreps
/// `alpha`, `beta`, `gamma`; `gamma` only for `d ≥ 3`).
pub fn delta_coeffs(n_uses: usize, d: usize) -> Result<Vec<DeltaEntry>, SymmetryError> {
    if d < 2 {
        return Err(SymmetryError::Unsupported(format!("d = {d}")));
    }
    let df = d as f64;
    let mut out = Vec::new();
    for class in string_classes(n_uses + 1, d) {
        let name = class.letters();
        let mut push = |irrep: &str, value: CMatrix| {
            out.push(DeltaEntry {
                class: name.clone(),
                irrep: irrep.into(),
                value,
            })
        };
        match n_uses {
            1 => {
                let p = if name == "xx" { 1.0 / df } else { 0.0 };
                push("p", scalar(p));
                push("q", scalar(1.0 - p));
            }
            2 => {
                let off = 0.5 / (df * df - 1.0).sqrt();
                let (alpha, beta, gamma) = match name.as_str() {
                    "xxx" => (
                        mat2(2.0 / (df + 1.0), 0.0, 0.0, 0.0),
                        (df - 1.0) / (df + 1.0),
                        0.0,
                    ),
                    "xxy" => (
                        mat2(0.5 / (df + 1.0), off, off, 0.5 / (df - 1.0)),
                        df / (2.0 * (df + 1.0)),
                        (df - 2.0) / (2.0 * (df - 1.0)),
                    ),
                    "xyx" => (
                        mat2(0.5 / (df + 1.0), -off, -off, 0.5 / (df - 1.0)),
                        df / (2.0 * (df + 1.0)),
                        (df - 2.0) / (2.0 * (df - 1.0)),
                    ),
                    "xyy" => (CMatrix::zeros(2, 2), 1.0, 0.0),
                    _ => (CMatrix::zeros(2, 2), 0.5, 0.5),
                };
                push("alpha", alpha);
                push("beta", scalar(beta));
                if d >= 3 {
                    push("gamma", scalar(gamma));
                }
            }
            _ => {
                return Err(SymmetryError::Unsupported(format!(
                    "no closed-form Δ table for N = {n_uses}"
                )))
            }
        }
    }
    Ok(out)
}

/// Same entries computed by tracing the block projectors of `decomp`
/// against the representative basis string of every class.
pub fn delta_brute_force(decomp: &BlockDecomposition) -> Vec<DeltaEntry> {
    let n_wires = decomp.rep.n_wires();
    let d = decomp.rep.d;
    let mut out = Vec::new();
    for class in string_classes(n_wires, d) {
        let s = basis_string(d, &class.pattern);
        for b in &decomp.blocks {
            out.push(DeltaEntry {
                class: class.letters(),
                irrep: b.label.clone(),
                value: b.delta(&s),
            });
        }
    }
    out
}
