//! Dense semidefinite programming for small Hermitian block problems.
//!
//! The solver maximizes a real linear objective over a tuple of Hermitian
//! positive semidefinite blocks subject to affine equality constraints:
//!
//! ```text
//! maximize   Σ_b Tr[C_b X_b]
//! subject to Σ_b Tr[A_{k,b} X_b] = r_k     for every constraint k
//!            X_b ⪰ 0                       for every block b
//! ```
//!
//! Complex Hermitian problems are reduced to real symmetric ones by
//! realification; problems whose data are entirely real skip that step.
//! The core is a primal-dual interior point method with the HKM search
//! direction and Mehrotra predictor-corrector steps, sized for blocks of a
//! few dozen rows at most.

mod error;
mod ipm;
mod problem;
mod psd;

pub use error::SdpError;
pub use problem::{BlockId, SdpBlock, SdpConstraint, SdpProblem};
pub use psd::{hermitian_eigen, psd_project};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense complex matrix used for every block and coefficient.
pub type CMatrix = DMatrix<Complex64>;

/// Tolerances and iteration caps for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Relative primal residual accepted at termination.
    pub primal_tol: f64,
    /// Relative dual residual accepted at termination.
    pub dual_tol: f64,
    /// Relative duality gap accepted at termination.
    pub gap_tol: f64,
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Hermiticity tolerance applied to the input coefficients.
    pub hermitian_tol: f64,
    /// Relative threshold below which a constraint row is treated as
    /// linearly dependent on earlier rows.
    pub rank_tol: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            primal_tol: 1e-9,
            dual_tol: 1e-9,
            gap_tol: 1e-8,
            max_iterations: 200,
            step_fraction: 0.95,
            hermitian_tol: 1e-10,
            rank_tol: 1e-10,
        }
    }
}

/// Termination state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    /// No PSD point satisfies the constraints.
    Infeasible,
    /// The objective grows without bound on the feasible set.
    Unbounded,
    MaxIterations,
    NumericalFailure,
}

impl SdpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::Unbounded => "unbounded",
            SdpStatus::MaxIterations => "max_iterations",
            SdpStatus::NumericalFailure => "numerical_failure",
        }
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal blocks, in the order they were added to the problem.
    pub blocks: Vec<CMatrix>,
    pub objective_value: f64,
    pub dual_objective: f64,
    /// Largest absolute violation of the original equality constraints.
    pub primal_residual: f64,
    /// Frobenius norm of the dual slack residual.
    pub dual_residual: f64,
    /// `|objective_value - dual_objective|`.
    pub dual_gap_estimate: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}

/// Solves `problem` with the given options.
///
/// Malformed input (non-Hermitian coefficients, dimension mismatches) is an
/// error; infeasibility and numerical trouble are reported through
/// [`SdpSolution::status`].
pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    problem.validate(opts.hermitian_tol)?;
    let real = problem.realify();
    let outcome = ipm::solve_real(&real.problem, opts);
    let blocks = real.complexify(&outcome.x);
    let primal_residual = problem.max_violation(&blocks);
    let objective_value = problem.objective(&blocks);
    Ok(SdpSolution {
        blocks,
        objective_value,
        dual_objective: outcome.dual_objective,
        primal_residual,
        dual_residual: outcome.dual_residual,
        dual_gap_estimate: (objective_value - outcome.dual_objective).abs(),
        status: outcome.status,
        iterations: outcome.iterations,
    })
}
