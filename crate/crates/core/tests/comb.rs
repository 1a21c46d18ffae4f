use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use qmlearn::comb::*;
use qmlearn::learn::{build_instrument, optimize_1to1};
use qmlearn::linalg::max_abs;
use qmlearn::symmetry::haar::{haar_random_unitary, haar_unitary, random_hermitian, random_psd};
use qmlearn::symmetry::symmetrize;
use qmlearn::tensor::{omega, LabeledOperator, WireSystem};
use qmlearn::CMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn z(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn on(labels: &[usize], d: usize, m: CMatrix) -> LabeledOperator {
    LabeledOperator::new(WireSystem::uniform(labels, d).unwrap(), m).unwrap()
}

fn density(d: usize, seed: u64) -> CMatrix {
    let m = random_psd(d, &mut ChaCha8Rng::seed_from_u64(seed));
    let t = m.trace();
    m / t
}

#[test]
fn measurement_channel_at_identity() {
    let e = measurement_channel_choi(&CMatrix::identity(2, 2), 0, 1).unwrap();
    let mut expected = CMatrix::zeros(4, 4);
    expected[(0, 0)] = z(1.0);
    expected[(3, 3)] = z(1.0);
    assert_eq!(e.op.matrix(), &expected);
    assert_eq!(e.op.labels(), vec![1, 0]);
    let u = haar_random_unitary(3, 5);
    let e = measurement_channel_choi(&u, 0, 1).unwrap();
    assert!(
        max_abs(&(e.op.partial_trace(&[1]).unwrap().matrix() - CMatrix::identity(3, 3))) < 1e-12
    );
    assert!(matches!(
        measurement_channel_choi(&(u * z(1.1)), 0, 1),
        Err(CombError::NotUnitary(_))
    ));
}

#[test]
fn link_with_state_applies_channel() {
    let u = haar_random_unitary(2, 1);
    let choi = unitary_channel_choi(&u, 0, 1).unwrap();
    let rho = density(2, 2);
    let out = link_product(&choi.op, &on(&[0], 2, rho.clone())).unwrap();
    assert_eq!(out.labels(), vec![1]);
    assert!(max_abs(&(out.matrix() - &u * &rho * u.adjoint())) < 1e-12);

    let rho = density(3, 3);
    let e = measurement_channel_choi(&CMatrix::identity(3, 3), 0, 1).unwrap();
    let out = link_product(&e.op, &on(&[0], 3, rho.clone())).unwrap();
    let born = CMatrix::from_diagonal(&DVector::from_iterator(3, (0..3).map(|i| rho[(i, i)])));
    assert!(max_abs(&(out.matrix() - born)) < 1e-12);
}

#[test]
fn link_with_identity_channel_relabels() {
    let x = on(
        &[0, 5],
        2,
        random_hermitian(4, &mut ChaCha8Rng::seed_from_u64(4)),
    );
    let id =
        LabeledOperator::projector(WireSystem::uniform(&[7, 5], 2).unwrap(), &omega(2)).unwrap();
    let out = link_product(&x, &id).unwrap();
    let expected = x.relabel(5, 7).unwrap();
    assert!(out.max_abs_diff(&expected).unwrap() < 1e-12);
}

#[test]
fn link_dimension_mismatch() {
    let a = on(&[0], 2, CMatrix::identity(2, 2));
    let b = on(&[0], 3, CMatrix::identity(3, 3));
    assert!(link_product(&a, &b).is_err());
}

#[test]
fn deterministic_comb_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let e = measurement_channel_choi(&haar_unitary(2, &mut rng), 0, 1).unwrap();
        assert!(check_deterministic_comb(&e, 1e-9).unwrap().valid);
    }
    let choi = unitary_channel_choi(&haar_random_unitary(3, 2), 0, 1).unwrap();
    let check = check_deterministic_comb(&choi, 1e-9).unwrap();
    assert!(check.valid);
    assert!((check.witnesses[0].trace().re - 1.0).abs() < 1e-12);
    let doubled = Comb::new(
        choi.op.scale(z(2.0)),
        choi.teeth.clone(),
        CombKind::Deterministic,
    )
    .unwrap();
    assert!(!check_deterministic_comb(&doubled, 1e-9).unwrap().valid);
    assert!(Comb::new(
        choi.op.clone(),
        vec![Tooth::new(vec![0], vec![])],
        CombKind::Deterministic
    )
    .is_err());
}

#[test]
fn learning_wire_layout() {
    assert_eq!(learning_labels(2), vec![4, 3, 2, 1, 0]);
    assert_eq!(learning_quantum_labels(2), vec![4, 2, 0]);
    assert_eq!(
        learning_teeth(2),
        vec![
            Tooth::new(vec![], vec![0]),
            Tooth::new(vec![1], vec![2]),
            Tooth::new(vec![3, 4], vec![])
        ]
    );
}

#[test]
fn optimal_one_use_instrument_validates_and_replicates() {
    for d in 2..=3 {
        let inst = build_instrument(&optimize_1to1(d).unwrap()).unwrap();
        let dense = inst.to_dense().unwrap();
        assert!(validate_instrument(&dense, 1e-10).unwrap().passed());
        let u = haar_random_unitary(d, 9);
        let g = replicated_povm(&dense, &u).unwrap();
        let df = d as f64;
        for i in 0..d {
            let v = u.column(i);
            let expected = v * v.adjoint() * z(1.0 / (df * (df - 1.0)))
                + CMatrix::identity(d, d) * z((df * df - df - 1.0) / (df * df * (df - 1.0)));
            assert!(max_abs(&(&g.elements[i] - expected)) < 1e-12);
        }
        let negated = GeneralizedInstrument::new(
            dense
                .elements
                .iter()
                .enumerate()
                .map(|(i, e)| if i == 0 { e.scale(z(-1.0)) } else { e.clone() })
                .collect(),
            dense.teeth.clone(),
        )
        .unwrap();
        assert!(!validate_instrument(&negated, 1e-9).unwrap().psd_ok);
        let scaled = GeneralizedInstrument::new(
            dense.elements.iter().map(|e| e.scale(z(1.1))).collect(),
            dense.teeth.clone(),
        )
        .unwrap();
        let report = validate_instrument(&scaled, 1e-9).unwrap();
        assert!(report.psd_ok && !report.normalized);
    }
}

#[test]
fn trivial_instrument_gives_flat_povm() {
    for (n, d) in [(1, 2), (2, 2), (1, 3)] {
        let inst = DiagonalInstrument::trivial(n, d);
        assert!(inst.validate(1e-12).passed());
        let g = inst.replicated_povm(&haar_random_unitary(d, 3)).unwrap();
        for e in &g.elements {
            assert!(max_abs(&(e - CMatrix::identity(d, d) * z(1.0 / d as f64))) < 1e-12);
        }
    }
}

#[test]
fn symmetrized_instrument_has_diagonal_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let sym = symmetrize(&DiagonalInstrument::random(2, 2, &mut rng));
    let g = sym.replicated_povm(&CMatrix::identity(2, 2)).unwrap();
    for e in &g.elements {
        assert!(e[(0, 1)].norm() < 1e-12);
    }
}

#[test]
fn dense_and_diagonal_paths_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (n, d) in [(1, 2), (1, 3), (2, 2)] {
        let inst = DiagonalInstrument::random(n, d, &mut rng);
        let dense = inst.to_dense().unwrap();
        let diag_report = inst.validate(1e-9);
        let dense_report = validate_instrument(&dense, 1e-9).unwrap();
        assert!(diag_report.passed() && dense_report.passed());
        let back = DiagonalInstrument::from_dense(&dense, 1e-12).unwrap();
        for (a, b) in back.slots().iter().zip(inst.slots()) {
            assert!(max_abs(&(a - b)) < 1e-14);
        }
        let u = haar_unitary(d, &mut rng);
        let g1 = inst.replicated_povm(&u).unwrap();
        let g2 = replicated_povm(&dense, &u).unwrap();
        for (a, b) in g1.elements.iter().zip(&g2.elements) {
            assert!(max_abs(&(a - b)) < 1e-12);
        }
    }
}

#[test]
fn wire_mismatch_is_reported() {
    let inst = DiagonalInstrument::trivial(1, 2).to_dense().unwrap();
    assert!(matches!(
        inst.elements[0].partial_trace(&[9]),
        Err(qmlearn::tensor::TensorError::UnknownLabel(9))
    ));
    let wrong = GeneralizedInstrument {
        elements: vec![on(&[0, 1], 2, CMatrix::identity(4, 4))],
        teeth: vec![Tooth::new(vec![], vec![0, 1])],
    };
    assert!(matches!(
        replicated_povm(&wrong, &CMatrix::identity(2, 2)),
        Err(CombError::WireMismatch(_))
    ));
    assert!(DiagonalInstrument::from_strings(1, 2, vec![CMatrix::identity(4, 4)]).is_err());
    assert!(matches!(
        GeneralizedInstrument::new(vec![], vec![]),
        Err(CombError::Empty)
    ));
}

fn hermitian(dim: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |v| {
        let m = CMatrix::from_fn(dim, dim, |r, c| {
            Complex64::new(v[r * dim + c], v[dim * dim + r * dim + c])
        });
        &m + m.adjoint()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn link_product_is_associative(a in hermitian(4), b in hermitian(4), c in hermitian(4)) {
        let a = on(&[0, 1], 2, a);
        let b = on(&[1, 2], 2, b);
        let c = on(&[2, 3], 2, c);
        let left = link_product(&link_product(&a, &b).unwrap(), &c).unwrap();
        let right = link_product(&a, &link_product(&b, &c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-11);
    }

    #[test]
    fn link_product_is_commutative(a in hermitian(4), b in hermitian(4)) {
        let a = on(&[0, 1], 2, a);
        let b = on(&[1, 2], 2, b);
        let ab = link_product(&a, &b).unwrap();
        let ba = link_product(&b, &a).unwrap();
        prop_assert!(ab.max_abs_diff(&ba).unwrap() < 1e-12);
    }

    #[test]
    fn replicated_povm_is_complete(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = DiagonalInstrument::random(2, 2, &mut rng);
        prop_assert!(inst.validate(1e-9).passed());
        let g = inst.replicated_povm(&haar_unitary(2, &mut rng)).unwrap();
        prop_assert!(g.completeness_residual() < 1e-9);
        prop_assert!(g.min_eigenvalue() > -1e-9);
    }
}
