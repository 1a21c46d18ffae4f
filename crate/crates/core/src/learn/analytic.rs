//! Closed-form optima for one and two uses.

use super::{check_dimension, scalar_block, BlockParam, LearnError, LearnSolution, Mode};
use crate::symmetry::classes::equivalence_classes;
use crate::symmetry::DecompositionKind;
use crate::CMatrix;

/// `1 → 1`: `r^p_xx = 1/d`, `r^q_xy = 1/(d(d-1))`, `F = (d+1)/d²`.
pub fn optimize_1to1(d: usize) -> Result<LearnSolution, LearnError> {
    check_dimension(d)?;
    let df = d as f64;
    let f = (df + 1.0) / (df * df);
    let mut sol = LearnSolution::from_f(1, d, Mode::Sequential, DecompositionKind::ClosedForm, f);
    sol.block_params = vec![
        BlockParam::new("xx", "p", &scalar_block(1.0 / df)),
        BlockParam::new("xx", "q", &scalar_block(0.0)),
        BlockParam::new("xy", "p", &scalar_block(0.0)),
        BlockParam::new("xy", "q", &scalar_block(1.0 / (df * (df - 1.0)))),
    ];
    Ok(sol)
}

/// `F(t₊) = A t₊ + B sqrt(t₊ t₋) + C t₋` with `t₋ = (1 - d₊ t₊)/d₋`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective2to1 {
    pub d: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d_plus: f64,
    pub d_minus: f64,
}

impl Objective2to1 {
    pub fn t_minus(&self, t_plus: f64) -> f64 {
        ((1.0 - self.d_plus * t_plus) / self.d_minus).max(0.0)
    }

    pub fn eval(&self, t_plus: f64) -> f64 {
        let tm = self.t_minus(t_plus);
        self.a * t_plus + self.b * (t_plus * tm).max(0.0).sqrt() + self.c * tm
    }

    /// Upper end of the admissible range, where `t₋ = 0`.
    pub fn t_max(&self) -> f64 {
        1.0 / self.d_plus
    }
}

/// Objective assembled from the block-wise optima. For `d = 2` the `γ`
/// irrep and the `xyz` class are absent.
pub fn objective_2to1(d: usize) -> Objective2to1 {
    let df = d as f64;
    let d_plus = df * (df + 1.0) / 2.0;
    let d_minus = df * (df - 1.0) / 2.0;
    let b = ((df - 1.0) / (df + 1.0)).sqrt();
    let (a, c) = if d == 2 {
        (13.0 / 6.0, 0.5)
    } else {
        ((df * df + 3.0 * df + 4.0) / (2.0 * (df + 1.0)), df / 2.0)
    };
    Objective2to1 {
        d,
        a,
        b,
        c,
        d_plus,
        d_minus,
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Stationary point of the objective from the squared derivative
/// condition, a quadratic in `t₊`. Returns `None` when no root lies in the
/// admissible range with the right derivative sign.
pub fn stationary_t_plus(obj: &Objective2to1) -> Option<f64> {
    let (dp, dm, b) = (obj.d_plus, obj.d_minus, obj.b);
    let a1 = obj.a - obj.c * dp / dm;
    let qa = 4.0 * b * b * dp * dp + 4.0 * a1 * a1 * dm * dp;
    let qb = -(4.0 * b * b * dp + 4.0 * a1 * a1 * dm);
    let qc = b * b;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 || qa == 0.0 {
        return None;
    }
    let roots = [
        (-qb + disc.sqrt()) / (2.0 * qa),
        (-qb - disc.sqrt()) / (2.0 * qa),
    ];
    roots
        .into_iter()
        .filter(|&t| (0.0..=obj.t_max()).contains(&t))
        .find(|&t| (1.0 - 2.0 * dp * t) * a1 <= 0.0)
}

/// `2 → 1` optimum with the optimal `s`-blocks.
pub fn optimize_2to1(d: usize) -> Result<LearnSolution, LearnError> {
    check_dimension(d)?;
    let obj = objective_2to1(d);
    let (t_gs, f_gs) = golden_section_max(|t| obj.eval(t), 0.0, obj.t_max(), 1e-12);
    let t_plus = match stationary_t_plus(&obj) {
        Some(t) if obj.eval(t) >= f_gs - 1e-13 => t,
        _ => t_gs,
    };
    let t_minus = obj.t_minus(t_plus);
    let f = obj.eval(t_plus);

    let df = d as f64;
    let r = (t_plus * t_minus).sqrt();
    let half = (df - 1.0) / 2.0;
    let mat = |a: f64, b: f64, c: f64, e: f64| {
        CMatrix::from_row_slice(2, 2, &[a.into(), b.into(), c.into(), e.into()])
    };
    let zero2 = CMatrix::zeros(2, 2);
    let mut s: Vec<BlockParam> = Vec::new();
    for class in equivalence_classes(2, d) {
        let name = class.letters();
        let alpha = match name.as_str() {
            "xxx" => mat(t_plus, 0.0, 0.0, t_minus),
            "xxy" => mat(half * t_plus, half * r, half * r, half * t_minus),
            "xyx" => mat(half * t_plus, -half * r, -half * r, half * t_minus),
            _ => zero2.clone(),
        };
        let beta = match (name.as_str(), d) {
            ("xyy", _) => t_plus,
            ("xyz", _) => (df - 1.0) * t_plus,
            ("xxy" | "xyx", 2) => half * t_plus,
            _ => 0.0,
        };
        s.push(BlockParam::new(name.clone(), "alpha", &alpha));
        s.push(BlockParam::new(name.clone(), "beta", &scalar_block(beta)));
        if d >= 3 {
            let gamma = match name.as_str() {
                "xyy" => t_minus,
                "xyz" => (df - 1.0) * t_minus,
                _ => 0.0,
            };
            s.push(BlockParam::new(name, "gamma", &scalar_block(gamma)));
        }
    }
    // r = s / #(index strings of the class with a fixed outcome).
    let block_params = s
        .iter()
        .map(|p| {
            let k = match p.class.as_str() {
                "xxx" => 1.0,
                "xyz" => (df - 1.0) * (df - 2.0),
                _ => df - 1.0,
            };
            BlockParam::new(
                p.class.clone(),
                p.irrep.clone(),
                &(p.matrix() / num_complex::Complex64::new(k, 0.0)),
            )
        })
        .collect();

    let mut sol = LearnSolution::from_f(2, d, Mode::Sequential, DecompositionKind::ClosedForm, f);
    sol.t_plus = Some(t_plus);
    sol.t_minus = Some(t_minus);
    sol.block_params = block_params;
    sol.s_params = s;
    Ok(sol)
}
