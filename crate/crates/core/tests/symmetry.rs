use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use qmlearn::comb::DiagonalInstrument;
use qmlearn::linalg::max_abs;
use qmlearn::symmetry::classes::{all_strings, canonical, string_classes};
use qmlearn::symmetry::haar::{haar_unitary, random_hermitian};
use qmlearn::symmetry::relabel::relabel_residual;
use qmlearn::symmetry::*;
use qmlearn::tensor::perm_op;
use qmlearn::CMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn commutator_norm(x: &CMatrix, g: &CMatrix) -> f64 {
    (g * x - x * g).norm()
}

#[test]
fn class_counts() {
    let names = |n, d| {
        equivalence_classes(n, d)
            .iter()
            .map(|c| c.letters())
            .collect::<Vec<_>>()
    };
    assert_eq!(names(1, 2), ["xx", "xy"]);
    assert_eq!(names(1, 5), ["xx", "xy"]);
    let m: Vec<u64> = equivalence_classes(1, 5)
        .iter()
        .map(|c| c.multiplicity)
        .collect();
    assert_eq!(m, [5, 20]);
    assert_eq!(equivalence_classes(2, 2).len(), 4);
    assert_eq!(equivalence_classes(2, 3).len(), 5);
    assert_eq!(equivalence_classes(2, 7).len(), 5);
}

#[test]
fn class_count_three_uses_qubit_matches_orbit_enumeration() {
    // Orbits of the 16 strings under the swap 0 <-> 1.
    let mut orbits: Vec<Vec<Vec<usize>>> = Vec::new();
    for s in all_strings(4, 2) {
        let flipped: Vec<usize> = s.iter().map(|&x| 1 - x).collect();
        if !orbits.iter().any(|o| o.contains(&s)) {
            orbits.push(vec![s, flipped]);
        }
    }
    assert_eq!(orbits.len(), 8);
    assert_eq!(equivalence_classes(3, 2).len(), 8);
}

#[test]
fn multiplicities_sum_to_string_count() {
    for n in 1..=3 {
        for d in 2..=6 {
            let total: u64 = equivalence_classes(n, d)
                .iter()
                .map(|c| c.multiplicity)
                .sum();
            assert_eq!(total, (d as u64).pow(n as u32 + 1), "n={n} d={d}");
            for c in equivalence_classes(n, d) {
                assert_eq!(canonical(&c.pattern), c.pattern);
                assert!(c.parts <= d);
            }
        }
    }
}

fn check_decomposition(dec: &BlockDecomposition, seed: u64) {
    assert!(
        dec.completeness_residual() < 1e-10,
        "completeness {}",
        dec.completeness_residual()
    );
    assert!(
        dec.orthonormality_residual() < 1e-10,
        "orthonormality {}",
        dec.orthonormality_residual()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..5 {
        let g = dec.rep.group_element(&haar_unitary(dec.rep.d, &mut rng));
        for b in &dec.blocks {
            for a in 0..b.multiplicity {
                for bb in 0..b.multiplicity {
                    assert!(commutator_norm(&b.transition(a, bb), &g) < 1e-9);
                }
            }
        }
    }
}

#[test]
fn closed_form_one_use() {
    for d in 2..=5 {
        let dec = BlockDecomposition::closed_form(1, d).unwrap();
        check_decomposition(&dec, d as u64);
        let p = dec.block("p").unwrap().projector();
        let q = dec.block("q").unwrap().projector();
        assert!((p.trace().re - 1.0).abs() < 1e-12);
        assert!((q.trace().re - (d * d - 1) as f64).abs() < 1e-10);
        let w = qmlearn::tensor::omega(d);
        let expected = &w * w.adjoint() / Complex64::new(d as f64, 0.0);
        assert!(max_abs(&(p - expected)) < 1e-12);
    }
}

#[test]
fn closed_form_two_uses() {
    for d in 2..=4 {
        let dec = BlockDecomposition::closed_form(2, d).unwrap();
        check_decomposition(&dec, 10 + d as u64);
        let df = d as f64;
        let beta = dec.block("beta").unwrap();
        assert_eq!(beta.irrep_dim, d * (d + 2) * (d - 1) / 2);
        assert!((beta.projector().trace().re - df * (df + 2.0) * (df - 1.0) / 2.0).abs() < 1e-9);
        let alpha = dec.block("alpha").unwrap();
        assert_eq!((alpha.irrep_dim, alpha.multiplicity), (d, 2));
        match dec.block("gamma") {
            Some(g) => assert_eq!(g.irrep_dim, d * (d - 2) * (d + 1) / 2),
            None => assert_eq!(d, 2),
        }
    }
    let dec = BlockDecomposition::closed_form(2, 2).unwrap();
    assert!((dec.block("beta").unwrap().projector().trace().re - 4.0).abs() < 1e-10);
}

#[test]
fn numeric_decomposition_shapes() {
    let shapes = |rep: RepSpec| {
        BlockDecomposition::numeric(&rep, 3)
            .unwrap()
            .blocks
            .iter()
            .map(|b| (b.irrep_dim, b.multiplicity))
            .collect::<Vec<_>>()
    };
    assert_eq!(shapes(RepSpec::learning(3, 2)), [(5, 1), (3, 3), (1, 2)]);
    assert_eq!(shapes(RepSpec::plain(3, 2)), [(4, 1), (2, 2)]);
    assert_eq!(shapes(RepSpec::plain(2, 2)), [(3, 1), (1, 1)]);
    assert_eq!(shapes(RepSpec::learning(2, 3)), [(15, 1), (6, 1), (3, 2)]);
    let dec = BlockDecomposition::numeric(&RepSpec::learning(3, 2), 99).unwrap();
    check_decomposition(&dec, 5);
    let labels: Vec<&str> = dec.blocks.iter().map(|b| b.label.as_str()).collect();
    assert_eq!(labels, ["k5m1", "k3m3", "k1m2"]);
}

#[test]
fn unsupported_closed_form() {
    assert!(matches!(
        BlockDecomposition::closed_form(3, 2),
        Err(SymmetryError::Unsupported(_))
    ));
    assert!(matches!(
        schur_projectors(3, 3),
        Err(SymmetryError::Unsupported(_))
    ));
    assert!(matches!(
        delta_coeffs(3, 2),
        Err(SymmetryError::Unsupported(_))
    ));
    assert_eq!(schur_projectors(3, 2).unwrap().len(), 3);
}

#[test]
fn delta_table_matches_projector_traces() {
    for n in 1..=2 {
        for d in 2..=6 {
            let table = delta_coeffs(n, d).unwrap();
            let brute = delta_brute_force(&BlockDecomposition::closed_form(n, d).unwrap());
            assert_eq!(table.len(), brute.len());
            for (t, b) in table.iter().zip(&brute) {
                assert_eq!((&t.class, &t.irrep), (&b.class, &b.irrep));
                assert!(
                    max_abs(&(&t.value - &b.value)) < 1e-10,
                    "n={n} d={d} {} {}",
                    t.class,
                    t.irrep
                );
            }
        }
    }
}

#[test]
fn delta_anchor_values() {
    for d in 2..=6 {
        let df = d as f64;
        let table = delta_coeffs(2, d).unwrap();
        let get = |c: &str, i: &str| {
            table
                .iter()
                .find(|e| e.class == c && e.irrep == i)
                .map(|e| e.value.clone())
        };
        assert!((get("xyy", "beta").unwrap()[(0, 0)].re - 1.0).abs() < 1e-15);
        if d >= 3 {
            assert!((get("xyz", "beta").unwrap()[(0, 0)].re - 0.5).abs() < 1e-15);
        }
        let a = get("xxx", "alpha").unwrap();
        assert!((a[(0, 0)].re - 2.0 / (df + 1.0)).abs() < 1e-15);
        assert!(a[(1, 1)].norm() + a[(0, 1)].norm() < 1e-15);
    }
}

#[test]
fn twirl_projection_basics() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (n, d) in [(1, 2), (1, 3), (2, 2), (2, 3), (3, 2)] {
        let rep = RepSpec::learning(n, d);
        let tw = Twirler::new(rep.clone());
        let dim = rep.dim();
        let id = CMatrix::identity(dim, dim);
        assert!(max_abs(&(tw.apply(&id) - &id)) < 1e-10);
        let x = random_hermitian(dim, &mut rng);
        let t = tw.apply(&x);
        assert!(max_abs(&(tw.apply(&t) - &t)) < 1e-10);
        assert!((t.trace() - x.trace()).norm() < 1e-10);
        for _ in 0..50 {
            let g = rep.group_element(&haar_unitary(d, &mut rng));
            assert!(commutator_norm(&t, &g) < 1e-9);
        }
    }
}

#[test]
fn twirl_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rep = RepSpec::learning(1, 2);
    let x = random_hermitian(rep.dim(), &mut rng);
    let exact = twirl_matrix(&x, &rep);
    let mc = haar_twirl_monte_carlo(&x, &rep, 10_000, &mut rng);
    assert!((exact - mc).norm() < 5e-2);
}

#[test]
fn labeled_twirl_respects_conjugate_wires() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let sys = qmlearn::tensor::WireSystem::uniform(&[4, 2, 0], 2).unwrap();
    let x = qmlearn::tensor::LabeledOperator::new(sys, random_hermitian(8, &mut rng)).unwrap();
    let t = haar_twirl(&x, &[4]).unwrap();
    let expected = twirl_matrix(x.matrix(), &RepSpec::learning(2, 2));
    assert!(max_abs(&(t.matrix() - expected)) < 1e-12);
    assert!(haar_twirl(&x, &[7]).is_err());
}

#[test]
fn haar_state_average_is_maximally_mixed() {
    let d = 3;
    let samples = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut sum = vec![0.0; d];
    let mut sq = vec![0.0; d];
    for _ in 0..samples {
        let u = haar_unitary(d, &mut rng);
        for k in 0..d {
            let p = u[(k, 0)].norm_sqr();
            sum[k] += p;
            sq[k] += p * p;
        }
    }
    for k in 0..d {
        let mean = sum[k] / samples as f64;
        let var = sq[k] / samples as f64 - mean * mean;
        let se = (var / samples as f64).sqrt();
        assert!(
            (mean - 1.0 / d as f64).abs() < 3.0 * se,
            "k={k} mean={mean} se={se}"
        );
    }
}

#[test]
fn symmetrized_instrument_is_relabel_invariant_and_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (n, d) in [(1, 2), (1, 3), (2, 2), (2, 3)] {
        let inst = DiagonalInstrument::random(n, d, &mut rng);
        assert!(inst.validate(1e-9).passed());
        let sym = symmetrize(&inst);
        assert!(sym.validate(1e-9).passed(), "n={n} d={d}");
        assert!(relabel_residual(&sym) < 1e-14);
        // Already symmetric: fixed point.
        let again = relabel_symmetrize(&sym);
        for (a, b) in again.slots().iter().zip(sym.slots()) {
            assert!(max_abs(&(a - b)) < 1e-14);
        }
        // Seed covariance: G_σ(i) = T_σ G_i T_σ†.
        let g = sym.replicated_povm(&CMatrix::identity(d, d)).unwrap();
        let sigma: Vec<usize> = (0..d).map(|k| (k + 1) % d).collect();
        let t = perm_op(&sigma).unwrap();
        for i in 0..d {
            let lhs = &g.elements[sigma[i]];
            let rhs = &t * &g.elements[i] * t.adjoint();
            assert!(max_abs(&(lhs - rhs)) < 1e-12);
        }
    }
}

#[test]
fn dense_relabel_symmetrize_matches_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let inst = DiagonalInstrument::random(1, 2, &mut rng);
    let dense = relabel_symmetrize_dense(&inst.to_dense().unwrap(), 1e-12).unwrap();
    let expected = relabel_symmetrize(&inst).to_dense().unwrap();
    for (a, b) in dense.elements.iter().zip(&expected.elements) {
        assert!(a.max_abs_diff(b).unwrap() < 1e-14);
    }
}

fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn twirl_is_linear_and_hermiticity_preserving(a in vec_strategy(32), b in vec_strategy(32), s in -2.0f64..2.0) {
        let rep = RepSpec::learning(1, 2);
        let tw = Twirler::new(rep);
        let mk = |v: &[f64]| CMatrix::from_fn(4, 4, |r, c| Complex64::new(v[r * 4 + c], v[16 + r * 4 + c]));
        let x = mk(&a);
        let y = mk(&b);
        let lhs = tw.apply(&(&x + &y * Complex64::new(s, 0.0)));
        let rhs = tw.apply(&x) + tw.apply(&y) * Complex64::new(s, 0.0);
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-10);
        let h = &x + x.adjoint();
        let th = tw.apply(&h);
        prop_assert!(max_abs(&(&th - th.adjoint())) < 1e-10);
    }

    #[test]
    fn block_reduce_is_dual_to_embed(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dec = BlockDecomposition::closed_form(2, 2).unwrap();
        let k = random_hermitian(8, &mut rng);
        for b in &dec.blocks {
            let x = random_hermitian(b.multiplicity, &mut rng);
            let lhs = (&k * b.embed(&x)).trace();
            let rhs = (b.reduce(&k) * &x).trace();
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn class_index_is_relabel_invariant(s in prop::collection::vec(0usize..4, 1..5), shift in 0usize..4) {
        let classes = string_classes(s.len(), 4);
        let moved: Vec<usize> = s.iter().map(|x| (x + shift) % 4).collect();
        prop_assert_eq!(
            qmlearn::symmetry::classes::class_index(&classes, &s),
            qmlearn::symmetry::classes::class_index(&classes, &moved)
        );
    }
}

#[test]
fn basis_vector_sanity() {
    let v: DVector<Complex64> = qmlearn::tensor::basis_string(2, &[1, 0]);
    assert_eq!(v[2], Complex64::new(1.0, 0.0));
}
