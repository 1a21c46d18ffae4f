use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use qmlearn::linalg::max_abs;
use qmlearn::symmetry::haar::{ginibre, random_hermitian};
use qmlearn::tensor::*;
use qmlearn::CMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn z(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn op(labels: &[(usize, usize)], m: CMatrix) -> LabeledOperator {
    LabeledOperator::new(WireSystem::new(labels.to_vec()).unwrap(), m).unwrap()
}

fn random_op(labels: &[(usize, usize)], seed: u64) -> LabeledOperator {
    let dim = labels.iter().map(|l| l.1).product();
    op(
        labels,
        ginibre(dim, dim, &mut ChaCha8Rng::seed_from_u64(seed)),
    )
}

#[test]
fn wire_system_rejects_bad_input() {
    assert_eq!(
        WireSystem::new(vec![(1, 2), (1, 3)]),
        Err(TensorError::DuplicateLabel(1))
    );
    assert_eq!(
        WireSystem::new(vec![(4, 0)]),
        Err(TensorError::ZeroDimension(4))
    );
    let s = WireSystem::new(vec![(3, 2), (1, 3)]).unwrap();
    assert_eq!(s.total_dim(), 6);
    assert_eq!(s.dim_of(1), Some(3));
    assert_eq!(s.position(1), Some(1));
    assert!(LabeledOperator::new(s, CMatrix::zeros(5, 5)).is_err());
}

#[test]
fn kron_of_identities_and_projectors() {
    let a = LabeledOperator::identity(WireSystem::uniform(&[0], 2).unwrap());
    let b = LabeledOperator::identity(WireSystem::new(vec![(1, 3)]).unwrap());
    let ab = a.kron(&b).unwrap();
    assert_eq!(ab.matrix(), &CMatrix::identity(6, 6));
    let p0 =
        LabeledOperator::projector(WireSystem::uniform(&[0], 2).unwrap(), &basis(2, 0)).unwrap();
    let p1 =
        LabeledOperator::projector(WireSystem::uniform(&[1], 2).unwrap(), &basis(2, 1)).unwrap();
    let v = basis_string(2, &[0, 1]);
    assert_eq!(p0.kron(&p1).unwrap().matrix(), &(&v * v.adjoint()));
    assert_eq!(a.kron(&a), Err(TensorError::DuplicateLabel(0)));
}

#[test]
fn kron_trace_factorizes() {
    let a = random_op(&[(0, 2)], 1);
    let b = random_op(&[(1, 3)], 2);
    let ab = a.kron(&b).unwrap();
    // Oracle: explicit double sum of diagonal entries.
    let mut expected = z(0.0);
    for i in 0..2 {
        for j in 0..3 {
            expected += a.matrix()[(i, i)] * b.matrix()[(j, j)];
        }
    }
    assert!((ab.trace() - expected).norm() < 1e-12);
}

#[test]
fn partial_trace_examples() {
    let a = random_op(&[(0, 2)], 3);
    let b = random_op(&[(5, 3)], 4);
    let ab = a.kron(&b).unwrap();
    let reduced = ab.partial_trace(&[5]).unwrap();
    assert!(max_abs(&(reduced.matrix() - a.matrix() * b.trace())) < 1e-12);
    let w = omega(2);
    let bell = LabeledOperator::projector(WireSystem::uniform(&[0, 1], 2).unwrap(), &w).unwrap();
    assert_eq!(
        bell.partial_trace(&[1]).unwrap().matrix(),
        &CMatrix::identity(2, 2)
    );
    let full = ab.partial_trace(&[0, 5]).unwrap();
    assert_eq!(full.matrix().shape(), (1, 1));
    assert!((full.matrix()[(0, 0)] - ab.trace()).norm() < 1e-12);
    assert_eq!(ab.partial_trace(&[9]), Err(TensorError::UnknownLabel(9)));
}

#[test]
fn partial_trace_matches_index_sum() {
    let x = random_op(&[(0, 2), (1, 3), (2, 2)], 5);
    let m = x.matrix();
    // Oracle: trace wire 1 by summing the middle digit.
    let mut expected = CMatrix::zeros(4, 4);
    for a in 0..2 {
        for c in 0..2 {
            for ap in 0..2 {
                for cp in 0..2 {
                    for b in 0..3 {
                        expected[(a * 2 + c, ap * 2 + cp)] +=
                            m[((a * 3 + b) * 2 + c, (ap * 3 + b) * 2 + cp)];
                    }
                }
            }
        }
    }
    assert!(max_abs(&(x.partial_trace(&[1]).unwrap().matrix() - &expected)) < 1e-12);
    let nested = x.partial_trace(&[2]).unwrap().partial_trace(&[1]).unwrap();
    let joint = x.partial_trace(&[1, 2]).unwrap();
    assert!(nested.max_abs_diff(&joint).unwrap() < 1e-12);
}

#[test]
fn partial_transpose_examples() {
    let w = omega(2);
    let bell = LabeledOperator::projector(WireSystem::uniform(&[0, 1], 2).unwrap(), &w).unwrap();
    let swap = bell.partial_transpose(&[1]).unwrap();
    // Oracle: Σ |nm⟩⟨mn|.
    let mut expected = CMatrix::zeros(4, 4);
    for n in 0..2 {
        for m in 0..2 {
            expected[(n * 2 + m, m * 2 + n)] = z(1.0);
        }
    }
    assert_eq!(swap.matrix(), &expected);
    assert_eq!(swap.matrix(), &wire_perm_op(&[1, 0], 2).unwrap());
    let a = random_op(&[(0, 2)], 6);
    let b = random_op(&[(1, 3)], 7);
    let t = a.kron(&b).unwrap().partial_transpose(&[1]).unwrap();
    assert!(max_abs(&(t.matrix() - a.matrix().kronecker(&b.matrix().transpose()))) < 1e-15);
}

#[test]
fn permutation_operators() {
    assert_eq!(perm_op(&[0, 1, 2]).unwrap(), CMatrix::identity(3, 3));
    let x = perm_op(&[1, 0]).unwrap();
    assert_eq!(
        x,
        CMatrix::from_row_slice(2, 2, &[z(0.0), z(1.0), z(1.0), z(0.0)])
    );
    let t = perm_op(&[2, 0, 1]).unwrap();
    assert_eq!(t, t.conjugate());
    assert_eq!(&t * basis(3, 0), basis(3, 2));
    assert!(perm_op(&[0, 0]).is_err());
    assert_eq!(
        wire_perm_op(&[0, 1, 2], 2).unwrap(),
        CMatrix::identity(8, 8)
    );
}

#[test]
fn psd_checks() {
    let id = LabeledOperator::identity(WireSystem::uniform(&[0], 3).unwrap());
    assert!(id.is_psd(DEFAULT_TOL).unwrap());
    let neg = op(
        &[(0, 2)],
        CMatrix::from_diagonal(&DVector::from_vec(vec![z(1.0), z(-1.0)])),
    );
    assert!(!neg.is_psd(DEFAULT_TOL).unwrap());
    let g = random_op(&[(0, 4)], 8);
    let gram = g.adjoint().mul(&g).unwrap();
    assert!(gram.is_psd(DEFAULT_TOL).unwrap());
    assert!(matches!(
        g.is_psd(DEFAULT_TOL),
        Err(TensorError::NotHermitian(_))
    ));
}

#[test]
fn eigendecomposition_reconstructs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for dim in [1, 5, 32, 128] {
        let h = random_hermitian(dim, &mut rng) * z(10.0);
        let x = op(&[(0, dim)], h.clone());
        let (vals, vecs) = x.hermitian_eig(DEFAULT_TOL).unwrap();
        let rebuilt = &vecs * CMatrix::from_diagonal(&vals.map(z)) * vecs.adjoint();
        assert!((rebuilt - h).norm() < 1e-12, "dim={dim}");
        assert!(vals.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn reorder_and_relabel() {
    let x = random_op(&[(0, 2), (1, 3)], 10);
    let y = x.reorder(&[1, 0]).unwrap();
    assert_eq!(y.labels(), vec![1, 0]);
    assert!(x.max_abs_diff(&y).unwrap() < 1e-15);
    assert_eq!(y.reorder(&[0, 1]).unwrap(), x);
    let z2 = x.relabel(1, 7).unwrap();
    assert_eq!(z2.labels(), vec![0, 7]);
    assert!(x.relabel(1, 0).is_err());
    let ext = random_op(&[(1, 3)], 11).extend_to(x.system()).unwrap();
    assert_eq!(ext.labels(), vec![0, 1]);
}

fn small_matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |v| {
        CMatrix::from_fn(dim, dim, |r, c| {
            Complex64::new(v[r * dim + c], v[dim * dim + r * dim + c])
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partial_trace_of_product(a in small_matrix(2), b in small_matrix(3)) {
        let a = op(&[(0, 2)], a);
        let b = op(&[(1, 3)], b);
        let r = a.kron(&b).unwrap().partial_trace(&[1]).unwrap();
        prop_assert!(max_abs(&(r.matrix() - a.matrix() * b.trace())) < 1e-12);
    }

    #[test]
    fn partial_transpose_involution_and_spectrum(m in small_matrix(4)) {
        let h = &m + m.adjoint();
        let x = op(&[(0, 2), (1, 2)], h);
        let once = x.partial_transpose(&[1]).unwrap();
        prop_assert_eq!(&once.partial_transpose(&[1]).unwrap(), &x);
        let full = x.partial_transpose(&[0, 1]).unwrap();
        let (ev1, _) = x.hermitian_eig(1e-9).unwrap();
        let (ev2, _) = full.hermitian_eig(1e-9).unwrap();
        prop_assert!((ev1 - ev2).amax() < 1e-10);
    }

    #[test]
    fn perm_op_composition(p in Just((0..4).collect::<Vec<usize>>()).prop_shuffle(), q in Just((0..4).collect::<Vec<usize>>()).prop_shuffle()) {
        let pq: Vec<usize> = q.iter().map(|&x| p[x]).collect();
        let lhs = perm_op(&p).unwrap() * perm_op(&q).unwrap();
        prop_assert_eq!(lhs, perm_op(&pq).unwrap());
        let t = perm_op(&p).unwrap();
        prop_assert!(max_abs(&(t.adjoint() * &t - CMatrix::identity(4, 4))) < 1e-15);
        let wl = wire_perm_op(&p, 2).unwrap() * wire_perm_op(&q, 2).unwrap();
        prop_assert_eq!(wl, wire_perm_op(&pq, 2).unwrap());
    }
}
