use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qmlearn_sdp::{
    hermitian_eigen, psd_project, solve, CMatrix, SdpOptions, SdpProblem, SdpStatus,
};

fn unit(n: usize, r: usize, c: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(r, c)] += Complex64::new(0.5, 0.0);
    m[(c, r)] += Complex64::new(0.5, 0.0);
    m
}

fn imag_unit(n: usize, r: usize, c: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(r, c)] = Complex64::new(0.0, -0.5);
    m[(c, r)] = Complex64::new(0.0, 0.5);
    m
}

fn hermitian_from(vals: &[f64], n: usize) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |r, c| {
        Complex64::new(vals[2 * (r * n + c)], vals[2 * (r * n + c) + 1])
    });
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// max Tr[C ρ] over density matrices equals the top eigenvalue of C.
fn top_eigen_problem(c: &CMatrix) -> SdpProblem {
    let n = c.nrows();
    let mut p = SdpProblem::new();
    let b = p.add_block("rho", n);
    p.add_objective(b, c.clone());
    p.add_constraint(vec![(b, CMatrix::identity(n, n))], 1.0);
    p
}

#[test]
fn trace_bounded_by_identity() {
    // max Tr X  s.t.  X + S = I, X, S ⪰ 0.
    let n = 3;
    let mut p = SdpProblem::new();
    let x = p.add_block("x", n);
    let s = p.add_block("s", n);
    p.add_objective(x, CMatrix::identity(n, n));
    for r in 0..n {
        for c in r..n {
            let rhs = if r == c { 1.0 } else { 0.0 };
            p.add_constraint(vec![(x, unit(n, r, c)), (s, unit(n, r, c))], rhs);
            if r != c {
                p.add_constraint(vec![(x, imag_unit(n, r, c)), (s, imag_unit(n, r, c))], 0.0);
            }
        }
    }
    let sol = solve(&p, &SdpOptions::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Optimal);
    assert!(
        (sol.objective_value - 3.0).abs() < 1e-7,
        "{}",
        sol.objective_value
    );
    assert!(sol.primal_residual < 1e-7);
}

#[test]
fn correlation_matrix_optimum() {
    // max 2 Re X_01 with unit diagonal: X = [[1,1],[1,1]] gives 2.
    let mut p = SdpProblem::new();
    let b = p.add_block("x", 2);
    p.add_objective(b, unit(2, 0, 1) * Complex64::new(2.0, 0.0));
    p.add_constraint(vec![(b, unit(2, 0, 0))], 1.0);
    p.add_constraint(vec![(b, unit(2, 1, 1))], 1.0);
    let sol = solve(&p, &SdpOptions::default()).unwrap();
    assert!(sol.is_optimal());
    assert!((sol.objective_value - 2.0).abs() < 1e-7);
    assert!((sol.blocks[0][(0, 1)].re - 1.0).abs() < 1e-4);
}

#[test]
fn complex_objective_matches_top_eigenvalue() {
    let c = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
        ],
    );
    let sol = solve(&top_eigen_problem(&c), &SdpOptions::default()).unwrap();
    assert!(sol.is_optimal());
    assert!((sol.objective_value - 2.0).abs() < 1e-7);
    // The optimizer is the projector onto (1, i)/√2.
    assert!((sol.blocks[0][(1, 0)] - Complex64::new(0.0, 0.5)).norm() < 1e-4);
}

#[test]
fn contradictory_constraints_are_infeasible() {
    let mut p = SdpProblem::new();
    let b = p.add_block("x", 2);
    p.add_objective(b, CMatrix::identity(2, 2));
    p.add_constraint(vec![(b, CMatrix::identity(2, 2))], 1.0);
    p.add_constraint(vec![(b, CMatrix::identity(2, 2))], 2.0);
    let sol = solve(&p, &SdpOptions::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Infeasible);
}

#[test]
fn negative_trace_is_infeasible() {
    let mut p = SdpProblem::new();
    let b = p.add_block("x", 2);
    p.add_objective(b, unit(2, 0, 0));
    p.add_constraint(vec![(b, CMatrix::identity(2, 2))], -1.0);
    let sol = solve(&p, &SdpOptions::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Infeasible);
}

#[test]
fn unconstrained_direction_is_unbounded() {
    let mut p = SdpProblem::new();
    let b = p.add_block("x", 2);
    p.add_objective(b, CMatrix::identity(2, 2));
    p.add_constraint(vec![(b, unit(2, 0, 1))], 0.0);
    let sol = solve(&p, &SdpOptions::default()).unwrap();
    assert_eq!(sol.status, SdpStatus::Unbounded);
}

#[test]
fn duplicated_rows_are_tolerated() {
    let c = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(0.3, 0.0),
        Complex64::new(0.9, 0.0),
    ]));
    let mut p = top_eigen_problem(&c);
    p.add_constraint(
        vec![(0, CMatrix::identity(2, 2) * Complex64::new(2.0, 0.0))],
        2.0,
    );
    let sol = solve(&p, &SdpOptions::default()).unwrap();
    assert!(sol.is_optimal());
    assert!((sol.objective_value - 0.9).abs() < 1e-7);
}

#[test]
fn solves_are_deterministic() {
    let vals: Vec<f64> = (0..32)
        .map(|k| ((k * 37 % 11) as f64 - 5.0) / 7.0)
        .collect();
    let c = hermitian_from(&vals, 4);
    let a = solve(&top_eigen_problem(&c), &SdpOptions::default()).unwrap();
    let b = solve(&top_eigen_problem(&c), &SdpOptions::default()).unwrap();
    assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
    assert_eq!(a.blocks, b.blocks);
}

#[test]
fn malformed_input_is_an_error() {
    let mut p = SdpProblem::new();
    let b = p.add_block("x", 2);
    p.add_constraint(vec![(b + 1, CMatrix::identity(2, 2))], 1.0);
    assert!(solve(&p, &SdpOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn density_matrix_optimum_is_top_eigenvalue(vals in prop::collection::vec(-1.0f64..1.0, 2 * 16)) {
        let c = hermitian_from(&vals, 4);
        let sol = solve(&top_eigen_problem(&c), &SdpOptions::default()).unwrap();
        prop_assert!(sol.is_optimal());
        let (eig, _) = hermitian_eigen(&c);
        prop_assert!((sol.objective_value - eig[3]).abs() < 1e-6);
        // Weak duality up to solver tolerance.
        prop_assert!(sol.dual_objective >= sol.objective_value - 1e-6);
        let (xe, _) = hermitian_eigen(&sol.blocks[0]);
        prop_assert!(xe[0] > -1e-9);
    }

    #[test]
    fn projection_is_nearest_psd(vals in prop::collection::vec(-1.0f64..1.0, 2 * 9)) {
        let x = hermitian_from(&vals, 3);
        let p = psd_project(&x);
        let (pe, _) = hermitian_eigen(&p);
        prop_assert!(pe[0] > -1e-12);
        // Oracle: the distance equals the norm of the negative spectrum.
        let (xe, _) = hermitian_eigen(&x);
        let neg: f64 = xe.iter().filter(|v| **v < 0.0).map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(((&x - &p).norm() - neg).abs() < 1e-10);
        prop_assert!((psd_project(&p) - &p).norm() < 1e-10);
    }
}

#[test]
fn real_data_skips_realification() {
    let c = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]).map(|v| Complex64::new(v, 0.0));
    let sol = solve(&top_eigen_problem(&c), &SdpOptions::default()).unwrap();
    assert!((sol.objective_value - 3.0).abs() < 1e-7);
    assert!(sol.blocks[0].iter().all(|z| z.im == 0.0));
}
