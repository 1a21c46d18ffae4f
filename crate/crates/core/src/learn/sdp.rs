//! Symmetry-reduced SDP for learning networks with up to three uses.
//!
//! Variables are the multiplicity-space blocks of every class operator
//! `R_c` (commutant of `U* ⊗ U^⊗N`) and of the memory combs `S^(k)_c'`
//! (commutant of `U^⊗k`), where `c'` runs over classes of the index strings
//! `(j_{k-1}, ..., j_1)` the comb may depend on. Operator equalities between
//! commutant elements are imposed by pairing with a basis of the commutant.

use qmlearn_sdp::{solve, BlockId, SdpOptions, SdpProblem};
use serde::Serialize;

use super::{analytic, check_dimension, BlockParam, LearnError, LearnSolution, Mode, SolverReport};
use crate::linalg::{c, id_kron, trace_first};
use crate::symmetry::blocks::DECOMPOSITION_SEED;
use crate::symmetry::classes::{canonical_strings, class_index, string_classes};
use crate::symmetry::{BlockDecomposition, DecompositionKind, RepSpec};
use crate::tensor::basis_string;
use crate::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpLearnOptions {
    pub decomposition: DecompositionKind,
    pub solver: SdpOptions,
}

impl Default for SdpLearnOptions {
    fn default() -> Self {
        Self {
            decomposition: DecompositionKind::Numeric,
            solver: SdpOptions::default(),
        }
    }
}

/// Real symmetric basis `E_aa`, `E_ab + E_ba` of `m x m` matrices.
fn sym_basis(m: usize) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for a in 0..m {
        for b in a..m {
            let mut e = CMatrix::zeros(m, m);
            e[(a, b)] = c(1.0);
            e[(b, a)] = c(1.0);
            out.push(e);
        }
    }
    out
}

/// `(block, E)` pairs spanning the commutant as `V (I ⊗ E) V†`.
fn commutant_functionals(dec: &BlockDecomposition) -> Vec<(usize, CMatrix)> {
    dec.blocks
        .iter()
        .enumerate()
        .flat_map(|(k, b)| sym_basis(b.multiplicity).into_iter().map(move |e| (k, e)))
        .collect()
}

fn add_blocks(prob: &mut SdpProblem, prefix: &str, dec: &BlockDecomposition) -> Vec<BlockId> {
    dec.blocks
        .iter()
        .map(|b| prob.add_block(format!("{prefix}/{}", b.label), b.multiplicity))
        .collect()
}

/// Maximizes `F` over `N`-use learning networks in dimension `d`.
///
/// Supported: `N ≤ 2` with `d ≤ 4`, and `N = 3` with `d = 2`.
pub fn learning_sdp(
    n_uses: usize,
    d: usize,
    mode: Mode,
    opts: &SdpLearnOptions,
) -> Result<LearnSolution, LearnError> {
    check_dimension(d)?;
    let supported = matches!((n_uses, d), (1 | 2, 2..=4) | (3, 2));
    if !supported {
        return Err(LearnError::Unsupported(format!(
            "learning SDP for N = {n_uses}, d = {d}"
        )));
    }
    if opts.decomposition == DecompositionKind::ClosedForm && n_uses > 2 {
        return Err(LearnError::Unsupported(
            "closed-form blocks exist only for N ≤ 2".into(),
        ));
    }
    let top = BlockDecomposition::of_kind(opts.decomposition, n_uses, d)?;
    let plain: Vec<BlockDecomposition> = (1..=n_uses)
        .map(|k| BlockDecomposition::numeric(&RepSpec::plain(k, d), DECOMPOSITION_SEED))
        .collect::<Result<_, _>>()?;

    let mut prob = SdpProblem::new();
    let r_classes = string_classes(n_uses + 1, d);
    let r_ids: Vec<Vec<BlockId>> = r_classes
        .iter()
        .map(|cl| add_blocks(&mut prob, &format!("R/{}", cl.letters()), &top))
        .collect();
    // s_ids[k-1][class of length k-1][block]
    let s_classes: Vec<Vec<Vec<usize>>> =
        (1..=n_uses).map(|k| canonical_strings(k - 1, d)).collect();
    let s_ids: Vec<Vec<Vec<BlockId>>> = (1..=n_uses)
        .map(|k| {
            s_classes[k - 1]
                .iter()
                .map(|p| {
                    add_blocks(
                        &mut prob,
                        &format!("S{k}/{}", crate::symmetry::classes::pattern_letters(p)),
                        &plain[k - 1],
                    )
                })
                .collect()
        })
        .collect();
    let s_class = |k: usize, s: &[usize]| {
        class_index(&string_classes(k - 1, d), s).expect("string has a class")
    };

    // Objective (1/d) Σ_c n(c) ⟨c|R_c|c⟩.
    for (ci, cl) in r_classes.iter().enumerate() {
        let v = basis_string(d, &cl.pattern);
        let proj = &v * v.adjoint();
        for (bi, b) in top.blocks.iter().enumerate() {
            prob.add_objective(
                r_ids[ci][bi],
                b.reduce(&proj) * c(cl.multiplicity as f64 / d as f64),
            );
        }
    }

    // Σ_i R_{(i, j⃗)} = I ⊗ S^(N)_{j⃗ without its first index}.
    for js in canonical_strings(n_uses, d) {
        let s_idx = s_class(n_uses, &js[1..]);
        for (bi, e) in commutant_functionals(&top) {
            let block = &top.blocks[bi];
            let mut terms = Vec::new();
            for i in 0..d {
                let mut key = vec![i];
                key.extend_from_slice(&js);
                let ci = class_index(&r_classes, &key).expect("string has a class");
                terms.push((r_ids[ci][bi], &e * c(block.irrep_dim as f64)));
            }
            let reduced = trace_first(&block.embed(&e), d);
            for (mi, mb) in plain[n_uses - 1].blocks.iter().enumerate() {
                terms.push((s_ids[n_uses - 1][s_idx][mi], -mb.reduce(&reduced)));
            }
            prob.add_constraint(terms, 0.0);
        }
    }

    // Tr_first S^(k)_{c} = S^(k-1)_{c without its first index}.
    for k in (2..=n_uses).rev() {
        let low = &plain[k - 2];
        for (ci, pattern) in s_classes[k - 1].iter().enumerate() {
            let lower_idx = s_class(k - 1, &pattern[1..]);
            for (bi, e) in commutant_functionals(low) {
                let lifted = id_kron(d, &low.blocks[bi].embed(&e));
                let mut terms: Vec<(BlockId, CMatrix)> = plain[k - 1]
                    .blocks
                    .iter()
                    .enumerate()
                    .map(|(mi, mb)| (s_ids[k - 1][ci][mi], mb.reduce(&lifted)))
                    .collect();
                terms.push((
                    s_ids[k - 2][lower_idx][bi],
                    -(&e * c(low.blocks[bi].irrep_dim as f64)),
                ));
                prob.add_constraint(terms, 0.0);
            }
        }
    }

    // Tr S^(1) = 1.
    let first = &plain[0];
    let terms = first
        .blocks
        .iter()
        .enumerate()
        .map(|(mi, b)| {
            (
                s_ids[0][0][mi],
                CMatrix::identity(b.multiplicity, b.multiplicity) * c(b.irrep_dim as f64),
            )
        })
        .collect();
    prob.add_constraint(terms, 1.0);

    // Parallel: the memory combs may not depend on earlier outcomes.
    if mode == Mode::Parallel {
        for k in 2..=n_uses {
            for ci in 1..s_classes[k - 1].len() {
                for (mi, b) in plain[k - 1].blocks.iter().enumerate() {
                    for e in sym_basis(b.multiplicity) {
                        prob.add_constraint(
                            vec![(s_ids[k - 1][ci][mi], e.clone()), (s_ids[k - 1][0][mi], -e)],
                            0.0,
                        );
                    }
                }
            }
        }
    }

    let sol = solve(&prob, &opts.solver)?;
    if !sol.is_optimal() {
        return Err(LearnError::SolverStatus(sol.status.as_str().into()));
    }
    let mut out = LearnSolution::from_f(n_uses, d, mode, opts.decomposition, sol.objective_value);
    for (ci, cl) in r_classes.iter().enumerate() {
        for (bi, b) in top.blocks.iter().enumerate() {
            out.block_params.push(BlockParam::new(
                cl.letters(),
                b.label.clone(),
                &sol.blocks[r_ids[ci][bi]],
            ));
        }
    }
    out.solver = Some(SolverReport {
        status: sol.status.as_str().into(),
        iterations: sol.iterations,
        primal_objective: sol.objective_value,
        dual_objective: sol.dual_objective,
        primal_residual: sol.primal_residual,
        dual_gap_estimate: sol.dual_gap_estimate,
    });
    Ok(out)
}

/// `3 → 1` qubit optimum, sequential or restricted to parallel strategies.
pub fn optimize_3to1_qubit(mode: Mode) -> Result<LearnSolution, LearnError> {
    learning_sdp(3, 2, mode, &SdpLearnOptions::default())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub n_uses: usize,
    pub d: usize,
    pub f_sdp: f64,
    pub f_analytic: f64,
    pub abs_error: f64,
}

/// Solves the `N = 1, 2` problem numerically and compares with the closed
/// form.
pub fn crosscheck_sdp(n_uses: usize, d: usize) -> Result<CrossCheck, LearnError> {
    let analytic = match n_uses {
        1 => analytic::optimize_1to1(d)?,
        2 => analytic::optimize_2to1(d)?,
        _ => {
            return Err(LearnError::Unsupported(format!(
                "cross-check for N = {n_uses}"
            )))
        }
    };
    let numeric = learning_sdp(n_uses, d, Mode::Sequential, &SdpLearnOptions::default())?;
    Ok(CrossCheck {
        n_uses,
        d,
        f_sdp: numeric.f,
        f_analytic: analytic.f,
        abs_error: (numeric.f - analytic.f).abs(),
    })
}
