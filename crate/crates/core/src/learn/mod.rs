//! Optimal learning networks: closed-form `1 → 1` and `2 → 1` solutions,
//! and the symmetry-reduced SDP for up to three uses.

mod analytic;
mod sdp;

use serde::Serialize;
use thiserror::Error;

use crate::comb::{CombError, DiagonalInstrument};
use crate::linalg::{c, min_eigenvalue};
use crate::metrics::{figure_of_merit_d, lambda_from_f};
use crate::symmetry::classes::equivalence_classes;
use crate::symmetry::{BlockDecomposition, DecompositionKind, SymmetryError};
use crate::CMatrix;

pub use analytic::{
    golden_section_max, objective_2to1, optimize_1to1, optimize_2to1, stationary_t_plus,
    Objective2to1,
};
pub use sdp::{crosscheck_sdp, learning_sdp, optimize_3to1_qubit, CrossCheck, SdpLearnOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Comb(#[from] CombError),
    #[error(transparent)]
    Sdp(#[from] qmlearn_sdp::SdpError),
    #[error("SDP solver stopped with status {0}")]
    SolverStatus(String),
    #[error("block {irrep} of class {class} has eigenvalue {min_eig:.3e}")]
    NonPsd {
        class: String,
        irrep: String,
        min_eig: f64,
    },
    #[error("assembled instrument violates normalization by {0:.3e}")]
    NotNormalized(f64),
    #[error("missing block {irrep} for class {class}")]
    MissingBlock { class: String, irrep: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sequential,
    Parallel,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Sequential => "sequential",
            Mode::Parallel => "parallel",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequential" => Ok(Mode::Sequential),
            "parallel" => Ok(Mode::Parallel),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

/// Multiplicity-space matrix of one (class, irrep) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockParam {
    pub class: String,
    pub irrep: String,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl BlockParam {
    pub fn new(class: impl Into<String>, irrep: impl Into<String>, m: &CMatrix) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|k| f(&m[(r, k)])).collect())
                .collect()
        };
        Self {
            class: class.into(),
            irrep: irrep.into(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn matrix(&self) -> CMatrix {
        let n = self.re.len();
        CMatrix::from_fn(n, n, |r, k| {
            num_complex::Complex64::new(self.re[r][k], self.im[r][k])
        })
    }
}

/// Solver diagnostics of an SDP-based solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub status: String,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_gap_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnSolution {
    pub n_uses: usize,
    pub d: usize,
    pub mode: Mode,
    pub decomposition: DecompositionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_minus: Option<f64>,
    #[serde(rename = "F")]
    pub f: f64,
    pub lambda: f64,
    #[serde(rename = "D")]
    pub d_merit: f64,
    /// `r^ν_c`: the instrument is `R_c = Σ_ν V_ν (I ⊗ r^ν_c) V_ν†`.
    pub block_params: Vec<BlockParam>,
    /// `s^ν_c = r^ν_c` times the number of index strings sharing the
    /// outcome; only for two uses.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub s_params: Vec<BlockParam>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverReport>,
}

impl LearnSolution {
    fn from_f(
        n_uses: usize,
        d: usize,
        mode: Mode,
        decomposition: DecompositionKind,
        f: f64,
    ) -> Self {
        Self {
            n_uses,
            d,
            mode,
            decomposition,
            t_plus: None,
            t_minus: None,
            f,
            lambda: lambda_from_f(f, d),
            d_merit: figure_of_merit_d(f, d),
            block_params: Vec::new(),
            s_params: Vec::new(),
            solver: None,
        }
    }

    pub fn param(&self, class: &str, irrep: &str) -> Option<&BlockParam> {
        self.block_params
            .iter()
            .find(|p| p.class == class && p.irrep == irrep)
    }
}

/// Default PSD and normalization tolerance of [`build_instrument`].
pub const BUILD_TOL: f64 = 1e-7;

/// Assembles `R_c = Σ_ν V_ν (I ⊗ r^ν_c) V_ν†` for every class and checks
/// positivity and normalization. Irreps without a parameter are zero.
pub fn build_instrument(sol: &LearnSolution) -> Result<DiagonalInstrument, LearnError> {
    build_instrument_with_tol(sol, BUILD_TOL)
}

pub fn build_instrument_with_tol(
    sol: &LearnSolution,
    tol: f64,
) -> Result<DiagonalInstrument, LearnError> {
    let decomp = BlockDecomposition::of_kind(sol.decomposition, sol.n_uses, sol.d)?;
    let mut blocks = Vec::new();
    for class in equivalence_classes(sol.n_uses, sol.d) {
        let name = class.letters();
        let xs: Vec<CMatrix> = decomp
            .blocks
            .iter()
            .map(|b| match sol.param(&name, &b.label) {
                Some(p) => {
                    let x = p.matrix();
                    let min_eig = min_eigenvalue(&x);
                    if min_eig < -tol {
                        return Err(LearnError::NonPsd {
                            class: name.clone(),
                            irrep: b.label.clone(),
                            min_eig,
                        });
                    }
                    Ok(x)
                }
                None => Ok(CMatrix::zeros(b.multiplicity, b.multiplicity)),
            })
            .collect::<Result<_, _>>()?;
        blocks.push(decomp.assemble(&xs));
    }
    let inst = DiagonalInstrument::from_classes(sol.n_uses, sol.d, blocks)?;
    let report = inst.validate(tol);
    if !report.normalized {
        return Err(LearnError::NotNormalized(report.normalization_residual()));
    }
    Ok(inst)
}

/// `F = (1/d) Σ_c n(c) Σ_ν Tr[Δ^ν_c r^ν_c]` from block parameters alone.
pub fn fidelity_from_blocks(sol: &LearnSolution) -> Result<f64, LearnError> {
    let decomp = BlockDecomposition::of_kind(sol.decomposition, sol.n_uses, sol.d)?;
    let d = sol.d;
    let mut f = 0.0;
    for class in equivalence_classes(sol.n_uses, d) {
        let s = crate::tensor::basis_string(d, &class.pattern);
        for b in &decomp.blocks {
            if let Some(p) = sol.param(&class.letters(), &b.label) {
                f += class.multiplicity as f64 * (b.delta(&s) * p.matrix()).trace().re;
            }
        }
    }
    Ok(f / d as f64)
}

pub(crate) fn check_dimension(d: usize) -> Result<(), LearnError> {
    if d < 2 {
        return Err(LearnError::InvalidDimension(d));
    }
    Ok(())
}

pub(crate) fn scalar_block(x: f64) -> CMatrix {
    CMatrix::from_element(1, 1, c(x))
}
