//! Irreducible block structure of `U^{(*)}` tensor-power representations.
//!
//! Each isotypic component is described by an isometry `V` whose columns are
//! indexed by `(k, a)` (column `k * m + a`), with `k` running over the irrep
//! and `a` over its multiplicity space. Any commutant element then reads
//! `Σ_λ V_λ (I ⊗ x_λ) V_λ†` with a small `m_λ x m_λ` matrix `x_λ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::twirl::RepSpec;
use super::SymmetryError;
use crate::linalg::c;
use crate::tensor::{omega, wire_perm_op};
use crate::CMatrix;

/// Seed of the random commutant elements used by the numeric decomposition.
/// Fixed so that block labels and bases are reproducible.
pub const DECOMPOSITION_SEED: u64 = 0x5eed_b10c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionKind {
    ClosedForm,
    Numeric,
}

/// One isotypic component.
#[derive(Debug, Clone, PartialEq)]
pub struct IrrepBlock {
    pub label: String,
    pub irrep_dim: usize,
    pub multiplicity: usize,
    /// `D x (irrep_dim * multiplicity)` isometry, column `k * m + a`.
    pub isometry: CMatrix,
}

impl IrrepBlock {
    fn column(&self, k: usize, a: usize) -> nalgebra::DVectorView<'_, Complex64> {
        self.isometry.column(k * self.multiplicity + a)
    }

    /// Projector onto the whole isotypic component.
    pub fn projector(&self) -> CMatrix {
        &self.isometry * self.isometry.adjoint()
    }

    /// `P ⊗ |a⟩⟨b| = Σ_k v_{k,a} v_{k,b}†`.
    pub fn transition(&self, a: usize, b: usize) -> CMatrix {
        let dim = self.isometry.nrows();
        let mut out = CMatrix::zeros(dim, dim);
        for k in 0..self.irrep_dim {
            out += self.column(k, a) * self.column(k, b).adjoint();
        }
        out
    }

    /// `W` with `Tr[K V (I ⊗ x) V†] = Tr[W x]`, i.e.
    /// `W_ab = Σ_k v_{k,a}† K v_{k,b}`. This is the partial trace of `V†KV`
    /// over the irrep factor.
    pub fn reduce(&self, k_op: &CMatrix) -> CMatrix {
        let m = self.multiplicity;
        let full = self.isometry.adjoint() * k_op * &self.isometry;
        let mut out = CMatrix::zeros(m, m);
        for k in 0..self.irrep_dim {
            out += full.view((k * m, k * m), (m, m));
        }
        out
    }

    /// `V (I ⊗ x) V†`.
    pub fn embed(&self, x: &CMatrix) -> CMatrix {
        let lifted = CMatrix::identity(self.irrep_dim, self.irrep_dim).kronecker(x);
        &self.isometry * lifted * self.isometry.adjoint()
    }

    /// `Tr_irrep[(P ⊗ I)|s⟩⟨s|]` for a computational basis string.
    pub fn delta(&self, s: &DVector<Complex64>) -> CMatrix {
        self.reduce(&(s * s.adjoint()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub rep: RepSpec,
    pub kind: DecompositionKind,
    pub blocks: Vec<IrrepBlock>,
}

impl BlockDecomposition {
    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn block(&self, label: &str) -> Option<&IrrepBlock> {
        self.blocks.iter().find(|b| b.label == label)
    }

    /// Commutant element `Σ_λ V_λ (I ⊗ x_λ) V_λ†`.
    pub fn assemble(&self, xs: &[CMatrix]) -> CMatrix {
        let dim = self.dim();
        self.blocks
            .iter()
            .zip(xs)
            .fold(CMatrix::zeros(dim, dim), |acc, (b, x)| acc + b.embed(x))
    }

    /// Multiplicity-space matrices `x_λ = Tr_irrep[V_λ† R V_λ] / dim λ`.
    pub fn extract(&self, r: &CMatrix) -> Vec<CMatrix> {
        self.blocks
            .iter()
            .map(|b| b.reduce(r) / c(b.irrep_dim as f64))
            .collect()
    }

    /// Largest entry of `Σ_λ P_λ - I`.
    pub fn completeness_residual(&self) -> f64 {
        let dim = self.dim();
        let sum = self
            .blocks
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, b| acc + b.projector());
        crate::linalg::max_abs(&(sum - CMatrix::identity(dim, dim)))
    }

    /// Largest entry of `V†V - I` over all blocks together.
    pub fn orthonormality_residual(&self) -> f64 {
        let all = CMatrix::from_columns(
            &self
                .blocks
                .iter()
                .flat_map(|b| {
                    b.isometry
                        .column_iter()
                        .map(|c| c.into_owned())
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        );
        let n = all.ncols();
        crate::linalg::max_abs(&(all.adjoint() * &all - CMatrix::identity(n, n)))
    }

    /// Numeric decomposition from the spanning set of the commutant.
    ///
    /// 1. Orthonormalize the spanning set.
    /// 2. Solve for the center (elements commuting with the whole basis).
    /// 3. Eigenspaces of a random symmetric central element are the
    ///    isotypic components.
    /// 4. Inside a component, eigenspaces of a random symmetric commutant
    ///    element are the irrep copies; a random commutant element maps
    ///    the first copy onto the others and fixes a common basis.
    pub fn numeric(rep: &RepSpec, seed: u64) -> Result<Self, SymmetryError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rep.dim();
        let span: Vec<DMatrix<f64>> = rep.spanning_set().iter().map(|m| m.map(|z| z.re)).collect();
        let basis = orthonormalize(&span, 1e-9);
        let r = basis.len();

        // Center: z with Σ_l z_l [B_l, B_k] = 0 for every k.
        let comm: Vec<Vec<DMatrix<f64>>> = (0..r)
            .map(|l| {
                (0..r)
                    .map(|k| &basis[l] * &basis[k] - &basis[k] * &basis[l])
                    .collect()
            })
            .collect();
        let gram = DMatrix::from_fn(r, r, |l, lp| {
            (0..r).map(|k| comm[l][k].dot(&comm[lp][k])).sum::<f64>()
        });
        let eig = SymmetricEigen::new(gram);
        let scale = eig.eigenvalues.amax().max(1.0);
        let center: Vec<DMatrix<f64>> = (0..r)
            .filter(|&i| eig.eigenvalues[i] < 1e-9 * scale)
            .map(|i| combine(&basis, eig.eigenvectors.column(i).iter().copied()))
            .collect();
        if center.is_empty() {
            return Err(SymmetryError::NumericalFailure("empty center".into()));
        }

        let h = sym(&combine(
            &center,
            (0..center.len()).map(|_| rng.random_range(-1.0..1.0)),
        ));
        let components = eigen_clusters(&h, 1e-7);

        let mut blocks = Vec::new();
        for q in components {
            let block = split_component(&basis, &q, &mut rng)?;
            blocks.push(block);
        }
        let total: usize = blocks
            .iter()
            .map(|b: &IrrepBlock| b.irrep_dim * b.multiplicity)
            .sum();
        if total != dim {
            return Err(SymmetryError::NumericalFailure(format!(
                "components cover {total} of {dim} dimensions"
            )));
        }
        blocks.sort_by(|a, b| (b.irrep_dim, b.multiplicity).cmp(&(a.irrep_dim, a.multiplicity)));
        let mut seen: Vec<String> = Vec::new();
        for b in blocks.iter_mut() {
            let base = format!("k{}m{}", b.irrep_dim, b.multiplicity);
            let n = seen.iter().filter(|s| **s == base).count();
            seen.push(base.clone());
            b.label = if n == 0 { base } else { format!("{base}_{n}") };
        }
        Ok(Self {
            rep: rep.clone(),
            kind: DecompositionKind::Numeric,
            blocks,
        })
    }

    /// Closed-form decomposition of `U* ⊗ U^⊗N` for `N = 1, 2`.
    pub fn closed_form(n_uses: usize, d: usize) -> Result<Self, SymmetryError> {
        let rep = RepSpec::learning(n_uses, d);
        let blocks = match n_uses {
            1 => {
                let w = omega(d) / c((d as f64).sqrt());
                let p = IrrepBlock {
                    label: "p".into(),
                    irrep_dim: 1,
                    multiplicity: 1,
                    isometry: CMatrix::from_columns(std::slice::from_ref(&w)),
                };
                let q = range_block("q", &(CMatrix::identity(d * d, d * d) - &w * w.adjoint()));
                vec![p, q]
            }
            2 => {
                let (plus, minus) = psi_vectors(d);
                let mut cols = Vec::with_capacity(2 * d);
                for m in 0..d {
                    cols.push(plus[m].clone());
                    cols.push(minus[m].clone());
                }
                let alpha = IrrepBlock {
                    label: "alpha".into(),
                    irrep_dim: d,
                    multiplicity: 2,
                    isometry: CMatrix::from_columns(&cols),
                };
                let (sp, sm) = sym_projectors(d);
                let id = CMatrix::identity(d, d);
                let p_plus: CMatrix = plus
                    .iter()
                    .fold(CMatrix::zeros(d * d * d, d * d * d), |acc, v| {
                        acc + v * v.adjoint()
                    });
                let p_minus: CMatrix = minus
                    .iter()
                    .fold(CMatrix::zeros(d * d * d, d * d * d), |acc, v| {
                        acc + v * v.adjoint()
                    });
                let mut blocks = vec![alpha, range_block("beta", &(id.kronecker(&sp) - p_plus))];
                if d >= 3 {
                    blocks.push(range_block("gamma", &(id.kronecker(&sm) - p_minus)));
                }
                blocks
            }
            _ => {
                return Err(SymmetryError::Unsupported(format!(
                    "no closed-form decomposition for N = {n_uses}"
                )))
            }
        };
        Ok(Self {
            rep,
            kind: DecompositionKind::ClosedForm,
            blocks,
        })
    }

    /// Decomposition used for learning networks: closed form for `N = 1, 2`,
    /// numeric for `N = 3, d = 2`.
    pub fn for_learning(n_uses: usize, d: usize) -> Result<Self, SymmetryError> {
        match (n_uses, d) {
            (1, _) | (2, _) if d >= 2 => Self::closed_form(n_uses, d),
            (3, 2) => Self::numeric(&RepSpec::learning(3, 2), DECOMPOSITION_SEED),
            _ => Err(SymmetryError::Unsupported(format!(
                "learning decomposition for N = {n_uses}, d = {d}"
            ))),
        }
    }

    /// Decomposition by kind; numeric ones use [`DECOMPOSITION_SEED`].
    pub fn of_kind(
        kind: DecompositionKind,
        n_uses: usize,
        d: usize,
    ) -> Result<Self, SymmetryError> {
        match kind {
            DecompositionKind::ClosedForm => Self::closed_form(n_uses, d),
            DecompositionKind::Numeric => {
                Self::numeric(&RepSpec::learning(n_uses, d), DECOMPOSITION_SEED)
            }
        }
    }
}

/// `Ψ^±_m = (|ω⟩_{4,2}|m⟩_0 ± |ω⟩_{4,0}|m⟩_2) / sqrt(2(d±1))` on the wires
/// `(4, 2, 0)`.
pub fn psi_vectors(d: usize) -> (Vec<DVector<Complex64>>, Vec<DVector<Complex64>>) {
    let idx = |o: usize, x: usize, y: usize| (o * d + x) * d + y;
    let mut plus = Vec::with_capacity(d);
    let mut minus = Vec::with_capacity(d);
    for m in 0..d {
        let mut a = DVector::zeros(d * d * d);
        let mut b = DVector::zeros(d * d * d);
        for n in 0..d {
            a[idx(n, n, m)] += c(1.0);
            b[idx(n, m, n)] += c(1.0);
        }
        plus.push((&a + &b) / c((2.0 * (d as f64 + 1.0)).sqrt()));
        if d >= 2 {
            minus.push((&a - &b) / c((2.0 * (d as f64 - 1.0)).sqrt()));
        }
    }
    (plus, minus)
}

/// Projectors onto the symmetric and antisymmetric subspaces of two wires.
pub fn sym_projectors(d: usize) -> (CMatrix, CMatrix) {
    let swap = wire_perm_op(&[1, 0], d).expect("valid permutation");
    let id = CMatrix::identity(d * d, d * d);
    ((&id + &swap) * c(0.5), (&id - &swap) * c(0.5))
}

/// Multiplicity-one block spanning the range of a projector.
fn range_block(label: &str, projector: &CMatrix) -> IrrepBlock {
    let (vals, vecs) = qmlearn_sdp::hermitian_eigen(projector);
    let cols: Vec<DVector<Complex64>> = (0..vals.len())
        .filter(|&k| vals[k] > 0.5)
        .map(|k| vecs.column(k).into_owned())
        .collect();
    IrrepBlock {
        label: label.into(),
        irrep_dim: cols.len(),
        multiplicity: 1,
        isometry: CMatrix::from_columns(&cols),
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn combine(basis: &[DMatrix<f64>], coeffs: impl Iterator<Item = f64>) -> DMatrix<f64> {
    let (n, m) = basis[0].shape();
    basis
        .iter()
        .zip(coeffs)
        .fold(DMatrix::zeros(n, m), |acc, (b, x)| acc + b * x)
}

/// Gram-Schmidt (applied twice) on flattened matrices.
fn orthonormalize(span: &[DMatrix<f64>], tol: f64) -> Vec<DMatrix<f64>> {
    let mut out: Vec<DMatrix<f64>> = Vec::new();
    for m in span {
        let mut v = m.clone();
        let n0 = v.norm();
        for _ in 0..2 {
            for q in &out {
                let p = q.dot(&v);
                v -= q * p;
            }
        }
        let n = v.norm();
        if n > tol * n0.max(1.0) {
            out.push(v / n);
        }
    }
    out
}

/// Groups eigenvectors of a symmetric matrix by (numerically) equal
/// eigenvalues. Returns orthonormal column blocks.
fn eigen_clusters(h: &DMatrix<f64>, rel_tol: f64) -> Vec<DMatrix<f64>> {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let tol = rel_tol * (1.0 + eig.eigenvalues.amax());
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match groups.last_mut() {
            Some(g) if (eig.eigenvalues[k] - eig.eigenvalues[*g.last().unwrap()]).abs() < tol => {
                g.push(k)
            }
            _ => groups.push(vec![k]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            DMatrix::from_columns(
                &g.iter()
                    .map(|&k| eig.eigenvectors.column(k).into_owned())
                    .collect::<Vec<_>>(),
            )
        })
        .collect()
}

fn split_component<R: Rng>(
    basis: &[DMatrix<f64>],
    q: &DMatrix<f64>,
    rng: &mut R,
) -> Result<IrrepBlock, SymmetryError> {
    let random_element =
        |rng: &mut R| combine(basis, (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)));
    let c_sym = sym(&random_element(rng));
    let local = q.transpose() * c_sym * q;
    let copies: Vec<DMatrix<f64>> = eigen_clusters(&local, 1e-7)
        .into_iter()
        .map(|e| q * e)
        .collect();
    let m = copies.len();
    let k = copies[0].ncols();
    if copies.iter().any(|e| e.ncols() != k) {
        return Err(SymmetryError::NumericalFailure(
            "irrep copies differ in dimension".into(),
        ));
    }
    // Intertwine copy 1 with copy a through P_a A P_1.
    let mut aligned = vec![copies[0].clone()];
    for e in &copies[1..] {
        let mut attempt = 0;
        loop {
            let a = random_element(rng);
            let map = e.transpose() * &a * &copies[0];
            let s = map.norm() / (k as f64).sqrt();
            if s > 1e-3 * a.norm() / (a.nrows() as f64).sqrt() || attempt > 20 {
                aligned.push(e * map / s);
                break;
            }
            attempt += 1;
        }
    }
    let dim = q.nrows();
    let mut iso = CMatrix::zeros(dim, k * m);
    for kk in 0..k {
        for (a, v) in aligned.iter().enumerate() {
            for row in 0..dim {
                iso[(row, kk * m + a)] = c(v[(row, kk)]);
            }
        }
    }
    Ok(IrrepBlock {
        label: String::new(),
        irrep_dim: k,
        multiplicity: m,
        isometry: iso,
    })
}

/// Irreducible blocks of `U* ⊗ U^⊗N` on the learning wires.
pub fn schur_projectors(n_uses: usize, d: usize) -> Result<Vec<IrrepBlock>, SymmetryError> {
    Ok(BlockDecomposition::for_learning(n_uses, d)?.blocks)
}
