//! Infeasible-start primal-dual path following on real symmetric blocks.
//!
//! Internally the problem is a minimization
//!
//! ```text
//! min <K, X>  s.t.  A(X) = b,  X ⪰ 0          (K = -C)
//! max b'y     s.t.  A*(y) + Z = K,  Z ⪰ 0
//! ```
//!
//! The search direction is HKM: `ΔX = T - X - sym(X ΔZ Z⁻¹)` with the Schur
//! complement `M_ij = Tr[A_i X A_j Z⁻¹]`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::problem::RealProblem;
use crate::{SdpOptions, SdpStatus};

type Blocks = Vec<DMatrix<f64>>;
type Row = Vec<(usize, DMatrix<f64>)>;

pub(crate) struct Outcome {
    pub x: Blocks,
    pub dual_objective: f64,
    pub dual_residual: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

pub(crate) fn solve_real(p: &RealProblem, opts: &SdpOptions) -> Outcome {
    let zeros: Blocks = p.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    let (rows, rhs) = match independent_rows(p, opts.rank_tol) {
        Some(r) => r,
        None => {
            return Outcome {
                x: zeros,
                dual_objective: f64::NAN,
                dual_residual: f64::NAN,
                status: SdpStatus::Infeasible,
                iterations: 0,
            }
        }
    };
    Solver::new(p, rows, rhs, opts).run()
}

/// Orthonormalizes the constraint rows (modified Gram-Schmidt, applied
/// twice), dropping dependent rows. Returns `None` when a dependent row has
/// an inconsistent right-hand side.
fn independent_rows(p: &RealProblem, tol: f64) -> Option<(Vec<Row>, DVector<f64>)> {
    let mut basis: Vec<Row> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for (row, &b) in p.rows.iter().zip(&p.rhs) {
        let norm0 = row_dot(row, row).sqrt();
        let mut r = row.clone();
        let mut rb = b;
        for _ in 0..2 {
            for (q, &qb) in basis.iter().zip(&beta) {
                let c = row_dot(q, &r);
                row_axpy(&mut r, -c, q);
                rb -= c * qb;
            }
        }
        let norm = row_dot(&r, &r).sqrt();
        if norm <= tol * norm0.max(1e-300) || norm0 == 0.0 {
            if rb.abs() > 1e-8 * (1.0 + b.abs()) {
                return None;
            }
            continue;
        }
        for (_, m) in r.iter_mut() {
            *m /= norm;
        }
        basis.push(r);
        beta.push(rb / norm);
    }
    let rhs = DVector::from_vec(beta);
    Some((basis, rhs))
}

fn row_dot(a: &Row, b: &Row) -> f64 {
    let mut acc = 0.0;
    for (ba, ma) in a {
        for (bb, mb) in b {
            if ba == bb {
                acc += ma.dot(mb);
            }
        }
    }
    acc
}

fn row_axpy(target: &mut Row, alpha: f64, other: &Row) {
    for (b, m) in other {
        match target.iter_mut().find(|(bb, _)| bb == b) {
            Some((_, acc)) => *acc += m * alpha,
            None => target.push((*b, m * alpha)),
        }
    }
}

struct Solver<'a> {
    dims: &'a [usize],
    /// Minimization objective `K = -C`.
    k: Blocks,
    rows: Vec<Row>,
    /// For each block, the rows touching it: `(row index, coefficient index)`.
    by_block: Vec<Vec<(usize, usize)>>,
    b: DVector<f64>,
    opts: &'a SdpOptions,
}

impl<'a> Solver<'a> {
    fn new(p: &'a RealProblem, rows: Vec<Row>, b: DVector<f64>, opts: &'a SdpOptions) -> Self {
        let mut by_block = vec![Vec::new(); p.dims.len()];
        for (i, row) in rows.iter().enumerate() {
            for (t, (blk, _)) in row.iter().enumerate() {
                by_block[*blk].push((i, t));
            }
        }
        Self {
            dims: &p.dims,
            k: p.c.iter().map(|c| -c).collect(),
            rows,
            by_block,
            b,
            opts,
        }
    }

    fn a_op(&self, x: &Blocks) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|row| row.iter().map(|(b, a)| a.dot(&x[*b])).sum::<f64>()),
        )
    }

    fn at_op(&self, y: &DVector<f64>) -> Blocks {
        let mut out: Blocks = self.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (row, &yk) in self.rows.iter().zip(y.iter()) {
            for (b, a) in row {
                out[*b] += a * yk;
            }
        }
        out
    }

    fn schur(&self, x: &Blocks, zinv: &Blocks) -> DMatrix<f64> {
        let m = self.rows.len();
        let mut s = DMatrix::zeros(m, m);
        for (blk, touching) in self.by_block.iter().enumerate() {
            for &(j, tj) in touching {
                let g = &x[blk] * &self.rows[j][tj].1 * &zinv[blk];
                let gt = g.transpose();
                for &(i, ti) in touching {
                    if i <= j {
                        s[(i, j)] += self.rows[i][ti].1.dot(&gt);
                    }
                }
            }
        }
        for j in 0..m {
            for i in 0..j {
                s[(j, i)] = s[(i, j)];
            }
        }
        s
    }

    fn initial_point(&self) -> (Blocks, DVector<f64>, Blocks) {
        let n: usize = self.dims.iter().sum();
        let sqrt_n = (n as f64).sqrt();
        let mut xi = 10f64.max(sqrt_n);
        let mut eta = 10f64.max(sqrt_n);
        for (row, b) in self.rows.iter().zip(self.b.iter()) {
            let norm = row_dot(row, row).sqrt();
            xi = xi.max(sqrt_n * (1.0 + b.abs()) / (1.0 + norm));
            eta = eta.max(norm);
        }
        eta = eta.max(blocks_norm(&self.k));
        let x = self
            .dims
            .iter()
            .map(|&d| DMatrix::identity(d, d) * xi)
            .collect();
        let z = self
            .dims
            .iter()
            .map(|&d| DMatrix::identity(d, d) * eta)
            .collect();
        (x, DVector::zeros(self.rows.len()), z)
    }

    fn run(&self) -> Outcome {
        let n_total: f64 = self.dims.iter().sum::<usize>() as f64;
        let (mut x, mut y, mut z) = self.initial_point();
        let b_norm = self.b.norm();
        let k_norm = blocks_norm(&self.k);
        let tau = self.opts.step_fraction;
        let mut status = SdpStatus::MaxIterations;
        let mut iterations = 0;
        let mut rd_norm = f64::NAN;

        for iter in 0..=self.opts.max_iterations {
            iterations = iter;
            let ax = self.a_op(&x);
            let rp = &self.b - &ax;
            let aty = self.at_op(&y);
            let rd: Blocks = (0..self.dims.len())
                .map(|b| &self.k[b] - &z[b] - &aty[b])
                .collect();
            rd_norm = blocks_norm(&rd);
            let pobj = blocks_dot(&self.k, &x);
            let dobj = self.b.dot(&y);
            if !pobj.is_finite() || !dobj.is_finite() {
                status = SdpStatus::NumericalFailure;
                break;
            }
            let rel_p = rp.norm() / (1.0 + b_norm);
            let rel_d = rd_norm / (1.0 + k_norm);
            let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            if rel_p < self.opts.primal_tol
                && rel_d < self.opts.dual_tol
                && rel_gap < self.opts.gap_tol
            {
                status = SdpStatus::Optimal;
                break;
            }
            // Certificates: a huge dual objective with small relative residual
            // means the primal is empty; symmetrically for the primal.
            if dobj > 1e6 * (1.0 + k_norm) {
                let cert: Blocks = (0..self.dims.len()).map(|b| &self.k[b] - &rd[b]).collect();
                if blocks_norm(&cert) / dobj < 1e-7 || rel_d < 1e-6 {
                    status = SdpStatus::Infeasible;
                    break;
                }
            }
            if -pobj > 1e6 * (1.0 + b_norm) && ax.norm() / (-pobj) < 1e-7 {
                status = SdpStatus::Unbounded;
                break;
            }
            if iter == self.opts.max_iterations {
                break;
            }

            let mu = blocks_dot(&x, &z) / n_total;
            let zinv: Blocks = match z.iter().map(spd_inverse).collect::<Option<Blocks>>() {
                Some(v) => v,
                None => {
                    status = SdpStatus::NumericalFailure;
                    break;
                }
            };
            let schur = self.schur(&x, &zinv);
            let factor = match SchurFactor::new(schur) {
                Some(f) => f,
                None => {
                    status = SdpStatus::NumericalFailure;
                    break;
                }
            };
            let base = &rp + &ax + self.a_op(&mul3(&x, &rd, &zinv));

            // Predictor (affine scaling, target μ = 0).
            let zero: Blocks = self.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
            let (dx_p, dy_p, dz_p) = self.direction(&x, &zinv, &rd, &base, &factor, &zero);
            let ap = (tau * max_step(&x, &dx_p)).min(1.0);
            let ad = (tau * max_step(&z, &dz_p)).min(1.0);
            let mu_aff =
                blocks_dot(&add_scaled(&x, &dx_p, ap), &add_scaled(&z, &dz_p, ad)) / n_total;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            let _ = dy_p;

            // Corrector with the second-order term.
            let target: Blocks = (0..self.dims.len())
                .map(|b| sym(&(&zinv[b] * (sigma * mu) - &dx_p[b] * &dz_p[b] * &zinv[b])))
                .collect();
            let (dx, dy, dz) = self.direction(&x, &zinv, &rd, &base, &factor, &target);
            let ap = (tau * max_step(&x, &dx)).min(1.0);
            let ad = (tau * max_step(&z, &dz)).min(1.0);
            x = add_scaled(&x, &dx, ap);
            z = add_scaled(&z, &dz, ad);
            y += dy * ad;
            for b in x.iter_mut().chain(z.iter_mut()) {
                *b = sym(b);
            }
        }

        Outcome {
            dual_objective: -self.b.dot(&y),
            dual_residual: rd_norm,
            x,
            status,
            iterations,
        }
    }

    fn direction(
        &self,
        x: &Blocks,
        zinv: &Blocks,
        rd: &Blocks,
        base: &DVector<f64>,
        factor: &SchurFactor,
        target: &Blocks,
    ) -> (Blocks, DVector<f64>, Blocks) {
        let rhs = base - self.a_op(target);
        let dy = factor.solve(&rhs);
        let aty = self.at_op(&dy);
        let dz: Blocks = (0..self.dims.len()).map(|b| &rd[b] - &aty[b]).collect();
        let dx: Blocks = (0..self.dims.len())
            .map(|b| &target[b] - &x[b] - sym(&(&x[b] * &dz[b] * &zinv[b])))
            .collect();
        (dx, dy, dz)
    }
}

enum SchurFactor {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Empty,
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        if m.nrows() == 0 {
            return Some(SchurFactor::Empty);
        }
        if let Some(c) = Cholesky::new(m.clone()) {
            return Some(SchurFactor::Chol(c));
        }
        let lu = m.lu();
        if lu.is_invertible() {
            Some(SchurFactor::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            SchurFactor::Chol(c) => c.solve(rhs),
            SchurFactor::Lu(lu) => lu.solve(rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
            SchurFactor::Empty => DVector::zeros(0),
        }
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn mul3(a: &Blocks, b: &Blocks, c: &Blocks) -> Blocks {
    (0..a.len()).map(|k| &a[k] * &b[k] * &c[k]).collect()
}

fn add_scaled(a: &Blocks, d: &Blocks, alpha: f64) -> Blocks {
    a.iter().zip(d).map(|(x, dx)| x + dx * alpha).collect()
}

fn blocks_dot(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn blocks_norm(a: &Blocks) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    match Cholesky::new(m.clone()) {
        Some(c) => Some(sym(&c.inverse())),
        None => {
            let eig = SymmetricEigen::new(sym(m));
            let floor = eig.eigenvalues.amax() * 1e-15;
            if !floor.is_finite() || floor <= 0.0 {
                return None;
            }
            let inv = eig.eigenvalues.map(|v| 1.0 / v.max(floor));
            Some(&eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose())
        }
    }
}

/// Largest `α` with `x + α dx ⪰ 0` (infinite if `dx` never leaves the cone).
fn max_step(x: &Blocks, dx: &Blocks) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        if xb.nrows() == 0 {
            continue;
        }
        let w = match Cholesky::new(xb.clone()) {
            Some(c) => {
                let l = c.l();
                let w1 = l.solve_lower_triangular(db).unwrap_or_else(|| db.clone());
                let w2 = l
                    .solve_lower_triangular(&w1.transpose())
                    .unwrap_or_else(|| w1.transpose());
                sym(&w2)
            }
            None => {
                let eig = SymmetricEigen::new(sym(xb));
                let floor = eig.eigenvalues.amax().max(1e-300) * 1e-15;
                let s = eig.eigenvalues.map(|v| 1.0 / v.max(floor).sqrt());
                let scale =
                    &eig.eigenvectors * DMatrix::from_diagonal(&s) * eig.eigenvectors.transpose();
                sym(&(&scale * db * &scale))
            }
        };
        let min_eig = SymmetricEigen::new(w).eigenvalues.min();
        if min_eig < 0.0 {
            alpha = alpha.min(-1.0 / min_eig);
        }
    }
    alpha
}
