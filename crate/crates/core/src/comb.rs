//! Choi operators of quantum networks: link product, comb normalization,
//! generalized instruments and the measurement channel.
//!
//! Learning networks for `N` uses follow a fixed wire layout. Use `k`
//! (1-based) feeds the device on wire `2k-2` and receives the classical
//! outcome on wire `2k-1`; the state to be measured arrives on wire `2N`.
//! Instrument elements list their wires as `[2N, 2N-1, ..., 0]`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::linalg::{c, id_kron, max_abs, min_eigenvalue, psd_power, trace_first};
use crate::symmetry::classes::{
    all_strings, canonical_strings, class_index, string_classes, string_index,
};
use crate::symmetry::haar::random_psd;
use crate::tensor::{LabeledOperator, TensorError, WireSystem};
use crate::CMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CombError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("wire structure mismatch: {0}")]
    WireMismatch(String),
    #[error("an instrument needs at least one element")]
    Empty,
    #[error("classical wire {wire} carries off-diagonal entries of size {size:.3e}")]
    NotDiagonal { wire: usize, size: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombKind {
    Deterministic,
    Probabilistic,
}

/// One slot of a comb: wires entering it and wires leaving it.
///
/// Normalization traces the outputs of the last tooth first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tooth {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl Tooth {
    pub fn new(inputs: Vec<usize>, outputs: Vec<usize>) -> Self {
        Self { inputs, outputs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comb {
    pub op: LabeledOperator,
    pub teeth: Vec<Tooth>,
    pub kind: CombKind,
}

impl Comb {
    /// Every wire of `op` must belong to exactly one tooth.
    pub fn new(op: LabeledOperator, teeth: Vec<Tooth>, kind: CombKind) -> Result<Self, CombError> {
        let mut listed: Vec<usize> = teeth
            .iter()
            .flat_map(|t| t.inputs.iter().chain(&t.outputs).copied())
            .collect();
        listed.sort_unstable();
        let mut labels = op.labels();
        labels.sort_unstable();
        if listed != labels {
            return Err(CombError::WireMismatch(format!(
                "teeth cover wires {listed:?} but the operator has {labels:?}"
            )));
        }
        Ok(Self { op, teeth, kind })
    }
}

/// Result of the recursive normalization test.
#[derive(Debug, Clone)]
pub struct CombCheck {
    pub valid: bool,
    /// Largest entry deviation at each tooth, first tooth first.
    pub residuals: Vec<f64>,
    /// `|R^(0) - 1|`.
    pub trace_residual: f64,
    /// Reduced combs `R^(0), ..., R^(n-1)`.
    pub witnesses: Vec<LabeledOperator>,
}

impl CombCheck {
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .copied()
            .fold(self.trace_residual, f64::max)
    }
}

/// Checks `Tr_out(k)[R^(k)] = I_in(k) ⊗ R^(k-1)` for every tooth, from the
/// last one down, and `R^(0) = 1`.
pub fn check_deterministic_comb(comb: &Comb, tol: f64) -> Result<CombCheck, CombError> {
    let n = comb.teeth.len();
    let mut residuals = vec![0.0; n];
    let mut witnesses = Vec::with_capacity(n);
    let mut cur = comb.op.clone();
    for k in (0..n).rev() {
        let tooth = &comb.teeth[k];
        let x = cur.partial_trace(&tooth.outputs)?;
        let in_dim: usize = tooth
            .inputs
            .iter()
            .map(|&l| x.system().dim_of(l).ok_or(TensorError::UnknownLabel(l)))
            .product::<Result<usize, _>>()?;
        let reduced = x
            .partial_trace(&tooth.inputs)?
            .scale(c(1.0 / in_dim as f64));
        let expected = reduced.extend_to(x.system())?;
        residuals[k] = x.max_abs_diff(&expected)?;
        witnesses.push(reduced.clone());
        cur = reduced;
    }
    witnesses.reverse();
    let trace_residual = (cur.trace() - c(1.0)).norm();
    let valid = residuals.iter().all(|&r| r <= tol) && trace_residual <= tol;
    Ok(CombCheck {
        valid,
        residuals,
        trace_residual,
        witnesses,
    })
}

/// `Tr_K[a · b^{θ_K}]` over the shared wires `K`. The result lists the
/// remaining wires of `a` followed by those of `b`.
pub fn link_product(
    a: &LabeledOperator,
    b: &LabeledOperator,
) -> Result<LabeledOperator, CombError> {
    let a_labels = a.labels();
    let b_labels = b.labels();
    let shared: Vec<usize> = a_labels
        .iter()
        .copied()
        .filter(|l| b_labels.contains(l))
        .collect();
    for &l in &shared {
        let (da, db) = (a.system().dim_of(l).unwrap(), b.system().dim_of(l).unwrap());
        if da != db {
            return Err(TensorError::DimensionMismatch {
                label: l,
                left: da,
                right: db,
            }
            .into());
        }
    }
    let a_rest: Vec<usize> = a_labels
        .iter()
        .copied()
        .filter(|l| !shared.contains(l))
        .collect();
    let b_rest: Vec<usize> = b_labels
        .iter()
        .copied()
        .filter(|l| !shared.contains(l))
        .collect();
    let a_ord = a.reorder(&[a_rest.clone(), shared.clone()].concat())?;
    let b_ord = b.reorder(&[shared.clone(), b_rest.clone()].concat())?;

    let dim = |op: &LabeledOperator, ls: &[usize]| -> usize {
        ls.iter().map(|&l| op.system().dim_of(l).unwrap()).product()
    };
    let na = dim(a, &a_rest);
    let nk = dim(a, &shared);
    let nb = dim(b, &b_rest);
    let am = a_ord.matrix();
    let bm = b_ord.matrix();

    // result[(α β),(α' β')] = Σ_{κ κ'} a[(α κ),(α' κ')] b[(κ β),(κ' β')]
    let amat = CMatrix::from_fn(na * na, nk * nk, |r, col| {
        let (al, alp) = (r / na, r % na);
        let (ka, kb) = (col / nk, col % nk);
        am[(al * nk + ka, alp * nk + kb)]
    });
    let bmat = CMatrix::from_fn(nk * nk, nb * nb, |r, col| {
        let (ka, kb) = (r / nk, r % nk);
        let (be, bep) = (col / nb, col % nb);
        bm[(ka * nb + be, kb * nb + bep)]
    });
    let prod = amat * bmat;
    let out = CMatrix::from_fn(na * nb, na * nb, |r, col| {
        let (al, be) = (r / nb, r % nb);
        let (alp, bep) = (col / nb, col % nb);
        prod[(al * na + alp, be * nb + bep)]
    });
    let wires: Vec<(usize, usize)> = a_rest
        .iter()
        .map(|&l| (l, a.system().dim_of(l).unwrap()))
        .chain(b_rest.iter().map(|&l| (l, b.system().dim_of(l).unwrap())))
        .collect();
    Ok(LabeledOperator::new(WireSystem::new(wires)?, out)?)
}

pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.nrows();
    if u.ncols() != n {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

fn check_unitary(u: &CMatrix, tol: f64) -> Result<(), CombError> {
    let dev = unitarity_deviation(u);
    if dev > tol {
        return Err(CombError::NotUnitary(dev));
    }
    Ok(())
}

/// Choi operator `Σ_i |i⟩⟨i|_out ⊗ U*|i⟩⟨i|Uᵀ_in` of the channel measuring
/// `{U|i⟩⟨i|U†}` and writing the outcome on `output`.
pub fn measurement_channel_choi(
    u: &CMatrix,
    input: usize,
    output: usize,
) -> Result<Comb, CombError> {
    check_unitary(u, 1e-9)?;
    let d = u.nrows();
    let mut m = CMatrix::zeros(d * d, d * d);
    let uc = u.conjugate();
    for i in 0..d {
        let v = uc.column(i);
        let proj = v * v.adjoint();
        for r in 0..d {
            for s in 0..d {
                m[(i * d + r, i * d + s)] = proj[(r, s)];
            }
        }
    }
    let op = LabeledOperator::new(WireSystem::uniform(&[output, input], d)?, m)?;
    Comb::new(
        op,
        vec![Tooth::new(vec![input], vec![output])],
        CombKind::Deterministic,
    )
}

/// Choi operator `|U⟩⟩⟨⟨U|` of a unitary channel, `|U⟩⟩ = Σ_n U|n⟩_out |n⟩_in`.
pub fn unitary_channel_choi(u: &CMatrix, input: usize, output: usize) -> Result<Comb, CombError> {
    check_unitary(u, 1e-9)?;
    let d = u.nrows();
    let mut v = DVector::zeros(d * d);
    for n in 0..d {
        for r in 0..d {
            v[r * d + n] = u[(r, n)];
        }
    }
    let op = LabeledOperator::projector(WireSystem::uniform(&[output, input], d)?, &v)?;
    Comb::new(
        op,
        vec![Tooth::new(vec![input], vec![output])],
        CombKind::Deterministic,
    )
}

/// Outcome-indexed positive operators on one system.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    pub elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self, CombError> {
        let d = elements.first().ok_or(CombError::Empty)?.nrows();
        if elements.iter().any(|e| e.nrows() != d || e.ncols() != d) {
            return Err(CombError::WireMismatch(
                "POVM elements differ in size".into(),
            ));
        }
        Ok(Self { elements })
    }

    /// `{U|i⟩⟨i|U†}`.
    pub fn von_neumann(u: &CMatrix) -> Self {
        let elements = (0..u.ncols())
            .map(|i| {
                let v = u.column(i);
                v * v.adjoint()
            })
            .collect();
        Self { elements }
    }

    /// `I/d` for every one of `d` outcomes.
    pub fn trivial(d: usize) -> Self {
        Self {
            elements: vec![CMatrix::identity(d, d) * c(1.0 / d as f64); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Largest entry of `Σ_i P_i - I`.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .elements
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, e| acc + e);
        max_abs(&(sum - CMatrix::identity(d, d)))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.elements
            .iter()
            .map(min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.completeness_residual() <= tol && self.min_eigenvalue() >= -tol
    }

    /// Outcome probabilities `⟨ψ|P_i|ψ⟩`.
    pub fn probabilities(&self, psi: &DVector<Complex64>) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| (psi.adjoint() * e * psi)[(0, 0)].re)
            .collect()
    }
}

/// Wire labels `[2N, 2N-1, ..., 0]` of an `N`-use learning network.
pub fn learning_labels(n_uses: usize) -> Vec<usize> {
    (0..=2 * n_uses).rev().collect()
}

/// Quantum wires `[2N, 2N-2, ..., 0]` of an `N`-use learning network.
pub fn learning_quantum_labels(n_uses: usize) -> Vec<usize> {
    (0..=n_uses).rev().map(|k| 2 * k).collect()
}

/// Tooth structure of an `N`-use learning network.
pub fn learning_teeth(n_uses: usize) -> Vec<Tooth> {
    let mut teeth = vec![Tooth::new(vec![], vec![0])];
    for k in 2..=n_uses {
        teeth.push(Tooth::new(vec![2 * k - 3], vec![2 * k - 2]));
    }
    teeth.push(Tooth::new(vec![2 * n_uses - 1, 2 * n_uses], vec![]));
    teeth
}

/// Outcome of [`validate_instrument`] and [`DiagonalInstrument::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentReport {
    pub min_eigenvalue: f64,
    /// Normalization residual of each tooth, first tooth first.
    pub level_residuals: Vec<f64>,
    pub trace_residual: f64,
    pub psd_ok: bool,
    pub normalized: bool,
}

impl InstrumentReport {
    pub fn passed(&self) -> bool {
        self.psd_ok && self.normalized
    }

    pub fn normalization_residual(&self) -> f64 {
        self.level_residuals
            .iter()
            .copied()
            .fold(self.trace_residual, f64::max)
    }
}

/// Outcome-indexed probabilistic combs on a shared wire system.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedInstrument {
    pub elements: Vec<LabeledOperator>,
    pub teeth: Vec<Tooth>,
}

impl GeneralizedInstrument {
    pub fn new(elements: Vec<LabeledOperator>, teeth: Vec<Tooth>) -> Result<Self, CombError> {
        let first = elements.first().ok_or(CombError::Empty)?.clone();
        let labels = first.labels();
        let system = first.system().clone();
        let elements = elements
            .into_iter()
            .map(|e| e.reorder(&labels))
            .collect::<Result<Vec<_>, _>>()?;
        if elements.iter().any(|e| e.system() != &system) {
            return Err(CombError::WireMismatch(
                "elements live on different systems".into(),
            ));
        }
        Comb::new(first, teeth.clone(), CombKind::Probabilistic)?;
        Ok(Self { elements, teeth })
    }

    /// `Σ_i R_i`.
    pub fn total(&self) -> LabeledOperator {
        let mut acc = self.elements[0].clone();
        for e in &self.elements[1..] {
            acc = acc.add(e).expect("elements share a system");
        }
        acc
    }
}

/// Checks positivity of every element and deterministic normalization of
/// the sum. The sum also serves as the witness for `0 ≤ R_i ≤ R_Ω`.
pub fn validate_instrument(
    inst: &GeneralizedInstrument,
    tol: f64,
) -> Result<InstrumentReport, CombError> {
    let min_eigenvalue = inst
        .elements
        .iter()
        .map(|e| min_eigenvalue(e.matrix()))
        .fold(f64::INFINITY, f64::min);
    let total = Comb::new(inst.total(), inst.teeth.clone(), CombKind::Deterministic)?;
    let check = check_deterministic_comb(&total, tol)?;
    Ok(InstrumentReport {
        min_eigenvalue,
        psd_ok: min_eigenvalue >= -tol,
        normalized: check.valid,
        level_residuals: check.residuals,
        trace_residual: check.trace_residual,
    })
}

/// `G_i = [R_i * E^(U) * ... * E^(U)]ᵀ` with one measurement channel per use.
pub fn replicated_povm(inst: &GeneralizedInstrument, u: &CMatrix) -> Result<Povm, CombError> {
    let labels = inst.elements[0].labels();
    let n_uses = (labels.len() - 1) / 2;
    let mut expected = learning_labels(n_uses);
    expected.sort_unstable();
    let mut have = labels.clone();
    have.sort_unstable();
    if have != expected || labels.len().is_multiple_of(2) {
        return Err(CombError::WireMismatch(format!(
            "expected wires 0..={} for a learning network, found {labels:?}",
            2 * n_uses
        )));
    }
    let channels = (1..=n_uses)
        .map(|k| measurement_channel_choi(u, 2 * k - 2, 2 * k - 1))
        .collect::<Result<Vec<_>, _>>()?;
    let elements = inst
        .elements
        .iter()
        .map(|r| {
            let mut cur = r.clone();
            for e in &channels {
                cur = link_product(&cur, &e.op)?;
            }
            Ok(cur.matrix().transpose())
        })
        .collect::<Result<Vec<_>, CombError>>()?;
    Povm::new(elements)
}

/// Learning instrument whose classical wires are diagonal.
///
/// Stores `R'_{i,j⃗}` on the quantum wires `[2N, 2N-2, ..., 0]` for every
/// string `(i, j_N, ..., j_1)`. Strings may share storage: a relabeling
/// symmetric instrument keeps one operator per equivalence class.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalInstrument {
    n_uses: usize,
    d: usize,
    slots: Vec<CMatrix>,
    index: Vec<usize>,
}

impl DiagonalInstrument {
    fn check_slots(n_uses: usize, d: usize, slots: &[CMatrix]) -> Result<(), CombError> {
        let dim = d.pow(n_uses as u32 + 1);
        if slots.iter().any(|s| s.nrows() != dim || s.ncols() != dim) {
            return Err(CombError::WireMismatch(format!(
                "blocks must be {dim}x{dim}"
            )));
        }
        Ok(())
    }

    /// One block per string, strings in lexicographic order.
    pub fn from_strings(n_uses: usize, d: usize, blocks: Vec<CMatrix>) -> Result<Self, CombError> {
        if blocks.len() != d.pow(n_uses as u32 + 1) {
            return Err(CombError::WireMismatch(format!(
                "expected {} blocks, found {}",
                d.pow(n_uses as u32 + 1),
                blocks.len()
            )));
        }
        Self::check_slots(n_uses, d, &blocks)?;
        Ok(Self {
            n_uses,
            d,
            index: (0..blocks.len()).collect(),
            slots: blocks,
        })
    }

    /// One block per equivalence class, in the order of
    /// [`equivalence_classes`](crate::symmetry::equivalence_classes).
    pub fn from_classes(n_uses: usize, d: usize, blocks: Vec<CMatrix>) -> Result<Self, CombError> {
        let classes = string_classes(n_uses + 1, d);
        if blocks.len() != classes.len() {
            return Err(CombError::WireMismatch(format!(
                "expected {} class blocks, found {}",
                classes.len(),
                blocks.len()
            )));
        }
        Self::check_slots(n_uses, d, &blocks)?;
        let index = all_strings(n_uses + 1, d)
            .map(|s| class_index(&classes, &s).expect("every string has a class"))
            .collect();
        Ok(Self {
            n_uses,
            d,
            slots: blocks,
            index,
        })
    }

    /// `R'_{i,j⃗} = I / d^(N+1)`: every outcome equally likely.
    pub fn trivial(n_uses: usize, d: usize) -> Self {
        let dim = d.pow(n_uses as u32 + 1);
        let block = CMatrix::identity(dim, dim) * c(1.0 / dim as f64);
        let n_classes = string_classes(n_uses + 1, d).len();
        Self::from_classes(n_uses, d, vec![block; n_classes]).expect("consistent sizes")
    }

    /// A random valid instrument: random states and channels for the
    /// memory cascade, then a random POVM split of the top level.
    pub fn random<R: Rng + ?Sized>(n_uses: usize, d: usize, rng: &mut R) -> Self {
        // S^(k) for every string (j_{k-1} .. j_1), stored by flat index.
        let mut lower: Vec<CMatrix> = {
            let rho = random_psd(d, rng);
            let tr = rho.trace();
            vec![rho / tr]
        };
        for k in 2..=n_uses {
            let dim_low = d.pow(k as u32 - 1);
            let mut next = Vec::with_capacity(d.pow(k as u32 - 1));
            for s in all_strings(k - 1, d) {
                let tail = string_index(&s[1..], d);
                let root = psd_power(&lower[tail], 0.5, 0.0);
                let a = random_psd(d * dim_low, rng);
                let norm = psd_power(&trace_first(&a, d), -0.5, 1e-14);
                let chan = id_kron(d, &norm) * a * id_kron(d, &norm);
                next.push(id_kron(d, &root) * chan * id_kron(d, &root));
            }
            lower = next;
        }
        let dim_top = d.pow(n_uses as u32 + 1);
        let mut blocks = vec![CMatrix::zeros(dim_top, dim_top); dim_top];
        for js in all_strings(n_uses, d) {
            let s = &lower[string_index(&js[1..], d)];
            let root = id_kron(d, &psd_power(s, 0.5, 0.0));
            let parts: Vec<CMatrix> = (0..d).map(|_| random_psd(dim_top, rng)).collect();
            let total = parts
                .iter()
                .fold(CMatrix::zeros(dim_top, dim_top), |acc, p| acc + p);
            let norm = psd_power(&total, -0.5, 1e-14);
            for (i, p) in parts.iter().enumerate() {
                let mut key = vec![i];
                key.extend_from_slice(&js);
                blocks[string_index(&key, d)] = &root * (&norm * p * &norm) * &root;
            }
        }
        Self::from_strings(n_uses, d, blocks).expect("consistent sizes")
    }

    pub fn n_uses(&self) -> usize {
        self.n_uses
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Distinct stored operators.
    pub fn slots(&self) -> &[CMatrix] {
        &self.slots
    }

    /// Block for the string `(i, j_N, ..., j_1)`.
    pub fn block(&self, string: &[usize]) -> &CMatrix {
        &self.slots[self.index[string_index(string, self.d)]]
    }

    /// Applies `f` to every stored operator.
    pub fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self {
            n_uses: self.n_uses,
            d: self.d,
            slots: self.slots.iter().map(f).collect(),
            index: self.index.clone(),
        }
    }

    pub fn quantum_system(&self) -> WireSystem {
        WireSystem::uniform(&learning_quantum_labels(self.n_uses), self.d).expect("distinct labels")
    }

    /// Dense elements `R_i = Σ_j⃗ |j⃗⟩⟨j⃗|_cl ⊗ R'_{i,j⃗}` on `[2N, ..., 0]`.
    pub fn to_dense(&self) -> Result<GeneralizedInstrument, CombError> {
        let n = self.n_uses;
        let d = self.d;
        let q_labels = learning_quantum_labels(n);
        let cl_labels: Vec<usize> = (1..=n).rev().map(|k| 2 * k - 1).collect();
        let target = WireSystem::uniform(&learning_labels(n), d)?;
        let mut elements = Vec::with_capacity(d);
        for i in 0..d {
            let mut acc: Option<LabeledOperator> = None;
            for js in all_strings(n, d) {
                let mut key = vec![i];
                key.extend_from_slice(&js);
                let q = LabeledOperator::new(
                    WireSystem::uniform(&q_labels, d)?,
                    self.block(&key).clone(),
                )?;
                let proj = LabeledOperator::projector(
                    WireSystem::uniform(&cl_labels, d)?,
                    &crate::tensor::basis_string(d, &js),
                )?;
                let term = proj.kron(&q)?.reorder(&target.labels())?;
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term)?,
                });
            }
            elements.push(acc.expect("at least one string"));
        }
        GeneralizedInstrument::new(elements, learning_teeth(n))
    }

    /// Extracts the diagonal classical blocks of a dense learning
    /// instrument; off-diagonal classical entries above `tol` are an error.
    pub fn from_dense(inst: &GeneralizedInstrument, tol: f64) -> Result<Self, CombError> {
        let labels = inst.elements[0].labels();
        let n = (labels.len() - 1) / 2;
        let d = inst.elements[0].system().dims()[0];
        let ordered = inst
            .elements
            .iter()
            .map(|e| {
                e.reorder(
                    &[
                        (1..=n).rev().map(|k| 2 * k - 1).collect::<Vec<_>>(),
                        learning_quantum_labels(n),
                    ]
                    .concat(),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let q = d.pow(n as u32 + 1);
        let cl = d.pow(n as u32);
        let mut blocks = vec![CMatrix::zeros(q, q); d * cl];
        for (i, e) in ordered.iter().enumerate() {
            let m = e.matrix();
            for a in 0..cl {
                for b in 0..cl {
                    let view = m.view((a * q, b * q), (q, q));
                    if a == b {
                        blocks[i * cl + a] = view.into_owned();
                    } else {
                        let size = view.iter().map(|z| z.norm()).fold(0.0, f64::max);
                        if size > tol {
                            return Err(CombError::NotDiagonal { wire: 1, size });
                        }
                    }
                }
            }
        }
        Self::from_strings(n, d, blocks)
    }

    /// Replicated POVM for the unknown unitary `u`:
    /// `G_iᵀ = Σ_j⃗ (I ⊗ ⟨φ_j⃗|) R'_{i,j⃗} (I ⊗ |φ_j⃗⟩)` with `φ_j = U|j⟩`.
    pub fn replicated_povm(&self, u: &CMatrix) -> Result<Povm, CombError> {
        check_unitary(u, 1e-9)?;
        if u.nrows() != self.d {
            return Err(CombError::WireMismatch(format!(
                "unitary must be {}x{}",
                self.d, self.d
            )));
        }
        let d = self.d;
        let n = self.n_uses;
        let mut elements = vec![CMatrix::zeros(d, d); d];
        for js in all_strings(n, d) {
            let phi = js.iter().fold(DVector::from_element(1, c(1.0)), |acc, &j| {
                acc.kronecker(&u.column(j).into_owned())
            });
            let lift = CMatrix::identity(d, d).kronecker(&phi);
            let lift_h = lift.adjoint();
            for (i, g) in elements.iter_mut().enumerate() {
                let mut key = vec![i];
                key.extend_from_slice(&js);
                *g += &lift_h * self.block(&key) * &lift;
            }
        }
        Povm::new(elements.into_iter().map(|g| g.transpose()).collect())
    }

    /// Positivity of every block and the normalization cascade
    /// `Σ_i R'_{i,j⃗} = I ⊗ S^(N)_{j_{N-1}..j_1}`,
    /// `Tr_first S^(k)_{j_{k-1}..j_1} = S^(k-1)_{j_{k-2}..j_1}`, `Tr S^(1) = 1`.
    pub fn validate(&self, tol: f64) -> InstrumentReport {
        let d = self.d;
        let n = self.n_uses;
        let min_eigenvalue = self
            .slots
            .iter()
            .map(min_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        // level_residuals[k-1] belongs to tooth k.
        let mut level_residuals = vec![0.0; n + 1];

        // Top level: the sum over outcomes must factor as I ⊗ S, and S may
        // not depend on j_N.
        let mut top_res: f64 = 0.0;
        let mut current: Vec<CMatrix> = Vec::new();
        let by_tail = d.pow(n as u32 - 1);
        let mut sums: Vec<Vec<CMatrix>> = vec![Vec::new(); by_tail];
        for js in all_strings(n, d) {
            let mut total = CMatrix::zeros(d.pow(n as u32 + 1), d.pow(n as u32 + 1));
            for i in 0..d {
                let mut key = vec![i];
                key.extend_from_slice(&js);
                total += self.block(&key);
            }
            let s = trace_first(&total, d) * c(1.0 / d as f64);
            top_res = top_res.max(max_abs(&(&total - id_kron(d, &s))));
            sums[string_index(&js[1..], d)].push(s);
        }
        for group in sums {
            let mean = group.iter().fold(
                CMatrix::zeros(group[0].nrows(), group[0].nrows()),
                |acc, s| acc + s,
            ) * c(1.0 / group.len() as f64);
            for s in &group {
                top_res = top_res.max(max_abs(&(s - &mean)));
            }
            current.push(mean);
        }
        level_residuals[n] = top_res;

        // Lower levels: current[t] is S^(k) for tail string t of length k-1.
        for k in (2..=n).rev() {
            let mut res: f64 = 0.0;
            let groups = d.pow(k as u32 - 2);
            let mut reduced: Vec<Vec<CMatrix>> = vec![Vec::new(); groups];
            for (idx, s) in current.iter().enumerate() {
                reduced[idx % groups].push(trace_first(s, d));
            }
            let mut next = Vec::with_capacity(groups);
            for group in reduced {
                let mean = group.iter().fold(
                    CMatrix::zeros(group[0].nrows(), group[0].nrows()),
                    |acc, s| acc + s,
                ) * c(1.0 / group.len() as f64);
                for s in &group {
                    res = res.max(max_abs(&(s - &mean)));
                }
                next.push(mean);
            }
            level_residuals[k - 1] = res;
            current = next;
        }
        // Tooth 1 has no inputs: only the trace condition remains.
        level_residuals[0] = 0.0;
        let trace_residual = (current[0].trace() - c(1.0)).norm();
        let normalized = level_residuals.iter().all(|&r| r <= tol) && trace_residual <= tol;
        InstrumentReport {
            min_eigenvalue,
            psd_ok: min_eigenvalue >= -tol,
            normalized,
            level_residuals,
            trace_residual,
        }
    }

    /// Canonical representative strings of each stored class, if this
    /// instrument is class-reduced.
    pub fn class_patterns(&self) -> Option<Vec<Vec<usize>>> {
        let patterns = canonical_strings(self.n_uses + 1, self.d);
        (patterns.len() == self.slots.len()).then_some(patterns)
    }
}
