//! Symmetrization of learning instruments: Haar twirl of every block and
//! averaging over simultaneous relabelings of outcomes and indices.

use super::classes::{all_strings, canonical_strings, class_index, string_classes};
use super::twirl::{RepSpec, Twirler};
use super::SymmetryError;
use crate::comb::{DiagonalInstrument, GeneralizedInstrument};
use crate::linalg::c;
use crate::CMatrix;

/// Averages `R'_{σ(i),σ(j⃗)}` over all `σ ∈ S_d`. Every orbit collapses to
/// its mean, so the result stores one block per class.
pub fn relabel_symmetrize(inst: &DiagonalInstrument) -> DiagonalInstrument {
    let n = inst.n_uses();
    let d = inst.d();
    let classes = string_classes(n + 1, d);
    let dim = d.pow(n as u32 + 1);
    let mut sums = vec![CMatrix::zeros(dim, dim); classes.len()];
    let mut counts = vec![0usize; classes.len()];
    for s in all_strings(n + 1, d) {
        let k = class_index(&classes, &s).expect("every string has a class");
        sums[k] += inst.block(&s);
        counts[k] += 1;
    }
    let blocks = sums
        .into_iter()
        .zip(counts)
        .map(|(s, k)| s * c(1.0 / k as f64))
        .collect();
    DiagonalInstrument::from_classes(n, d, blocks).expect("consistent sizes")
}

/// Dense counterpart of [`relabel_symmetrize`]; classical wires must be
/// diagonal within `tol`.
pub fn relabel_symmetrize_dense(
    inst: &GeneralizedInstrument,
    tol: f64,
) -> Result<GeneralizedInstrument, SymmetryError> {
    let diag = DiagonalInstrument::from_dense(inst, tol)?;
    Ok(relabel_symmetrize(&diag).to_dense()?)
}

/// Projects every block onto the commutant of `U* ⊗ U^⊗N`.
pub fn covariant_symmetrize(inst: &DiagonalInstrument) -> DiagonalInstrument {
    let twirler = Twirler::new(RepSpec::learning(inst.n_uses(), inst.d()));
    inst.map_blocks(|b| twirler.apply(b))
}

/// Twirl followed by relabeling average.
pub fn symmetrize(inst: &DiagonalInstrument) -> DiagonalInstrument {
    relabel_symmetrize(&covariant_symmetrize(inst))
}

/// Largest deviation from `R'_s = R'_{σ(s)}` over all strings, comparing
/// each string with its canonical representative.
pub fn relabel_residual(inst: &DiagonalInstrument) -> f64 {
    let n = inst.n_uses();
    let d = inst.d();
    let reps = canonical_strings(n + 1, d);
    let classes = string_classes(n + 1, d);
    all_strings(n + 1, d)
        .map(|s| {
            let k = class_index(&classes, &s).expect("every string has a class");
            crate::linalg::max_abs(&(inst.block(&s) - inst.block(&reps[k])))
        })
        .fold(0.0, f64::max)
}
