//! Invariant suites shared by the test harness and the command line.

use std::str::FromStr;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::comb::{
    check_deterministic_comb, link_product, measurement_channel_choi, unitary_channel_choi, Comb,
    CombKind, DiagonalInstrument, Povm,
};
use crate::learn::{
    build_instrument, crosscheck_sdp, optimize_1to1, optimize_2to1, optimize_3to1_qubit, Mode,
};
use crate::linalg::{c, max_abs};
use crate::metrics::{
    fidelity_class_sum, fidelity_seed, mixture_decompose, povm_distance, povm_distance_monte_carlo,
    random_povm,
};
use crate::symmetry::classes::equivalence_classes;
use crate::symmetry::haar::{haar_unitary, random_hermitian, random_psd};
use crate::symmetry::relabel::relabel_residual;
use crate::symmetry::{
    delta_brute_force, delta_coeffs, symmetrize, BlockDecomposition, RepSpec, Twirler,
};
use crate::tensor::{LabeledOperator, WireSystem};
use crate::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Combs,
    Symmetry,
    Metrics,
    Learning,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "combs" => Ok(Suite::Combs),
            "symmetry" => Ok(Suite::Symmetry),
            "metrics" => Ok(Suite::Metrics),
            "learning" => Ok(Suite::Learning),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    /// Measured quantity: a residual, an error or a value.
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

struct Recorder {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    fn new(suite: &'static str) -> Self {
        Self {
            suite,
            checks: Vec::new(),
        }
    }

    /// Passes when `value <= tolerance`.
    fn below(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.checks.push(Check {
            suite: self.suite,
            name: name.into(),
            passed: value <= tolerance,
            value,
            tolerance,
        });
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool, value: f64) {
        self.checks.push(Check {
            suite: self.suite,
            name: name.into(),
            passed: ok,
            value,
            tolerance: 0.0,
        });
    }

    fn failed(&mut self, name: impl Into<String>) {
        self.holds(name, false, f64::NAN);
    }
}

pub fn run(suite: Suite, seed: u64) -> VerifyReport {
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Combs {
        checks.extend(combs(seed));
    }
    if all || suite == Suite::Symmetry {
        checks.extend(symmetry(seed));
    }
    if all || suite == Suite::Metrics {
        checks.extend(metrics(seed));
    }
    if all || suite == Suite::Learning {
        checks.extend(learning(seed));
    }
    VerifyReport {
        suite,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn random_density<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    let m = random_psd(d, rng);
    let t = m.trace();
    m / t
}

fn labeled(labels: &[usize], d: usize, m: CMatrix) -> LabeledOperator {
    LabeledOperator::new(WireSystem::uniform(labels, d).expect("distinct labels"), m)
        .expect("matching size")
}

pub fn combs(seed: u64) -> Vec<Check> {
    let mut r = Recorder::new("combs");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u = haar_unitary(3, &mut rng);
        let e = measurement_channel_choi(&u, 0, 1).expect("unitary");
        worst = worst.max(
            check_deterministic_comb(&e, 1e-9)
                .expect("consistent wires")
                .max_residual(),
        );
    }
    r.below(
        "measurement channel is a deterministic comb (100 unitaries)",
        worst,
        1e-9,
    );

    let u = haar_unitary(2, &mut rng);
    let choi = unitary_channel_choi(&u, 0, 1).expect("unitary");
    r.below(
        "unitary channel is a deterministic comb",
        check_deterministic_comb(&choi, 1e-9)
            .expect("wires")
            .max_residual(),
        1e-9,
    );
    let doubled = Comb::new(
        choi.op.scale(c(2.0)),
        choi.teeth.clone(),
        CombKind::Deterministic,
    )
    .expect("wires");
    let res = check_deterministic_comb(&doubled, 1e-9).expect("wires");
    r.holds(
        "doubled channel is rejected",
        !res.valid,
        res.max_residual(),
    );

    // Born rule through the link product.
    let u = haar_unitary(3, &mut rng);
    let rho = random_density(3, &mut rng);
    let e = measurement_channel_choi(&u, 0, 1).expect("unitary");
    let out = link_product(&e.op, &labeled(&[0], 3, rho.clone())).expect("link");
    let born = CMatrix::from_diagonal(&DVector::from_iterator(
        3,
        (0..3).map(|i| {
            let v = u.column(i);
            (v.adjoint() * &rho * v)[(0, 0)]
        }),
    ));
    r.below(
        "link with a state gives the Born distribution",
        max_abs(&(out.matrix() - born)),
        1e-12,
    );

    // Associativity and commutativity on random operators.
    let mut assoc: f64 = 0.0;
    let mut comm: f64 = 0.0;
    for _ in 0..10 {
        let a = labeled(&[0, 1], 2, random_hermitian(4, &mut rng));
        let b = labeled(&[1, 2], 2, random_hermitian(4, &mut rng));
        let cc = labeled(&[2, 3], 2, random_hermitian(4, &mut rng));
        let left = link_product(&link_product(&a, &b).expect("link"), &cc).expect("link");
        let right = link_product(&a, &link_product(&b, &cc).expect("link")).expect("link");
        assoc = assoc.max(left.max_abs_diff(&right).expect("same wires"));
        let ab = link_product(&a, &b).expect("link");
        let ba = link_product(&b, &a).expect("link");
        comm = comm.max(ab.max_abs_diff(&ba).expect("same wires"));
    }
    r.below("link product is associative", assoc, 1e-12);
    r.below("link product is commutative up to wire order", comm, 1e-12);

    // Replicated POVMs of valid instruments.
    let mut completeness: f64 = 0.0;
    let mut agreement: f64 = 0.0;
    for (n, d) in [(1, 2), (1, 3), (2, 2)] {
        let inst = DiagonalInstrument::random(n, d, &mut rng);
        let u = haar_unitary(d, &mut rng);
        let g = inst.replicated_povm(&u).expect("unitary");
        completeness = completeness.max(g.completeness_residual());
        let dense = inst.to_dense().expect("dense");
        let gd = crate::comb::replicated_povm(&dense, &u).expect("dense replication");
        for (x, y) in g.elements.iter().zip(&gd.elements) {
            agreement = agreement.max(max_abs(&(x - y)));
        }
        let report = crate::comb::validate_instrument(&dense, 1e-9).expect("dense");
        r.holds(
            format!("random instrument N={n} d={d} validates"),
            report.passed(),
            report.normalization_residual(),
        );
    }
    r.below("replicated POVMs sum to identity", completeness, 1e-9);
    r.below("diagonal and dense replication agree", agreement, 1e-10);
    r.checks
}

pub fn symmetry(seed: u64) -> Vec<Check> {
    let mut r = Recorder::new("symmetry");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5);

    let mut bad = 0.0;
    for n in 1..=3 {
        for d in 2..=6 {
            let total: u64 = equivalence_classes(n, d)
                .iter()
                .map(|c| c.multiplicity)
                .sum();
            if total != (d as u64).pow(n as u32 + 1) {
                bad += 1.0;
            }
        }
    }
    r.holds("class multiplicities sum to d^(N+1)", bad == 0.0, bad);
    r.holds(
        "N=2 has 4 classes at d=2 and 5 at d=3",
        equivalence_classes(2, 2).len() == 4 && equivalence_classes(2, 3).len() == 5,
        0.0,
    );

    for (n, d) in [(1, 2), (1, 3), (2, 2), (2, 3), (3, 2)] {
        match BlockDecomposition::for_learning(n, d) {
            Ok(dec) => {
                r.below(
                    format!("blocks complete N={n} d={d}"),
                    dec.completeness_residual(),
                    1e-10,
                );
                let mut comm: f64 = 0.0;
                for _ in 0..5 {
                    let g = dec.rep.group_element(&haar_unitary(d, &mut rng));
                    for b in &dec.blocks {
                        let p = b.projector();
                        comm = comm.max((&g * &p - &p * &g).norm());
                    }
                }
                r.below(
                    format!("blocks commute with the representation N={n} d={d}"),
                    comm,
                    1e-9,
                );
            }
            Err(_) => r.failed(format!("blocks N={n} d={d}")),
        }
    }

    let mut worst: f64 = 0.0;
    for n in 1..=2 {
        for d in 2..=6 {
            let table = delta_coeffs(n, d).expect("supported");
            let brute =
                delta_brute_force(&BlockDecomposition::closed_form(n, d).expect("supported"));
            for (t, b) in table.iter().zip(&brute) {
                worst = worst.max(max_abs(&(&t.value - &b.value)));
            }
        }
    }
    r.below("Δ table equals projector traces (d=2..6)", worst, 1e-10);

    let mut idem: f64 = 0.0;
    let mut trace: f64 = 0.0;
    let mut comm: f64 = 0.0;
    for (n, d) in [(1, 2), (1, 3), (2, 2), (3, 2)] {
        let rep = RepSpec::learning(n, d);
        let tw = Twirler::new(rep.clone());
        let x = random_hermitian(rep.dim(), &mut rng);
        let t = tw.apply(&x);
        idem = idem.max(max_abs(&(tw.apply(&t) - &t)));
        trace = trace.max((t.trace() - x.trace()).norm());
        for _ in 0..50 {
            let g = rep.group_element(&haar_unitary(d, &mut rng));
            comm = comm.max((&g * &t - &t * &g).norm());
        }
    }
    r.below("twirl is idempotent", idem, 1e-10);
    r.below("twirl preserves the trace", trace, 1e-10);
    r.below(
        "twirled operators commute with 50 random unitaries",
        comm,
        1e-9,
    );

    let mut relabel: f64 = 0.0;
    let mut covariance: f64 = 0.0;
    let mut validity: f64 = 0.0;
    for (n, d) in [(1, 3), (2, 2), (2, 3)] {
        let sym = symmetrize(&DiagonalInstrument::random(n, d, &mut rng));
        relabel = relabel.max(relabel_residual(&sym));
        validity = validity.max(sym.validate(1e-9).normalization_residual());
        let g = sym
            .replicated_povm(&CMatrix::identity(d, d))
            .expect("unitary");
        let sigma: Vec<usize> = (0..d).map(|k| (k + 1) % d).collect();
        let t = crate::tensor::perm_op(&sigma).expect("permutation");
        for i in 0..d {
            covariance = covariance.max(max_abs(
                &(&g.elements[sigma[i]] - &t * &g.elements[i] * t.adjoint()),
            ));
        }
    }
    r.below(
        "symmetrized instruments are relabeling invariant",
        relabel,
        1e-12,
    );
    r.below("symmetrized instruments stay normalized", validity, 1e-9);
    r.below("seed POVM is relabeling covariant", covariance, 1e-10);
    r.checks
}

pub fn metrics(seed: u64) -> Vec<Check> {
    let mut r = Recorder::new("metrics");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11);

    let mut nonneg = f64::INFINITY;
    let mut self_dist: f64 = 0.0;
    let mut sensitivity = f64::INFINITY;
    let mut convexity: f64 = f64::NEG_INFINITY;
    let mut invariance: f64 = 0.0;
    for k in 0..100 {
        let d = 2 + k % 3;
        let p = random_povm(d, d, &mut rng);
        let q = random_povm(d, d, &mut rng);
        let q2 = random_povm(d, d, &mut rng);
        let dpq = povm_distance(&p, &q).expect("shapes");
        nonneg = nonneg.min(dpq);
        self_dist = self_dist.max(povm_distance(&p, &p).expect("shapes"));
        let h = random_hermitian(d, &mut rng) * c(1e-12);
        let mut pert = p.clone();
        pert.elements[0] += &h;
        pert.elements[1] -= &h;
        sensitivity = sensitivity.min(povm_distance(&p, &pert).expect("shapes"));
        let w: f64 = rng.random();
        let mix = Povm {
            elements: q
                .elements
                .iter()
                .zip(&q2.elements)
                .map(|(a, b)| a * c(w) + b * c(1.0 - w))
                .collect(),
        };
        let lhs = povm_distance(&p, &mix).expect("shapes");
        let rhs = w * dpq + (1.0 - w) * povm_distance(&p, &q2).expect("shapes");
        convexity = convexity.max(lhs - rhs);
        let u = haar_unitary(d, &mut rng);
        let rot = |x: &Povm| Povm {
            elements: x.elements.iter().map(|e| &u * e * u.adjoint()).collect(),
        };
        invariance =
            invariance.max((povm_distance(&rot(&p), &rot(&q)).expect("shapes") - dpq).abs());
    }
    r.holds(
        "distance is nonnegative (100 triples)",
        nonneg >= 0.0,
        nonneg,
    );
    r.below("distance of a POVM to itself is zero", self_dist, 0.0);
    r.holds(
        "1e-12 perturbations give a positive distance",
        sensitivity > 0.0,
        sensitivity,
    );
    r.below(
        "distance is convex in its second argument",
        convexity,
        1e-14,
    );
    r.below("distance is unitarily invariant", invariance, 1e-12);

    let mut anchor: f64 = 0.0;
    for d in 2..=6 {
        let df = d as f64;
        let e = Povm::von_neumann(&CMatrix::identity(d, d));
        let dist = povm_distance(&e, &Povm::trivial(d)).expect("shapes");
        anchor = anchor.max((dist - (df - 1.0) / (df * (df + 1.0))).abs());
    }
    r.below("D(E, I/d) = (d-1)/(d(d+1))", anchor, 1e-15);

    let p = random_povm(3, 3, &mut rng);
    let q = random_povm(3, 3, &mut rng);
    let exact = povm_distance(&p, &q).expect("shapes");
    let mc = povm_distance_monte_carlo(&p, &q, 100_000, &mut rng).expect("shapes");
    r.below(
        "closed-form distance matches state sampling (sigmas)",
        mc.sigma_distance(exact),
        3.0,
    );

    let mut dual: f64 = 0.0;
    let mut lambda_link: f64 = 0.0;
    let mut structure: f64 = 0.0;
    for k in 0..10 {
        let (n, d) = [(1, 2), (1, 3), (2, 2), (2, 3)][k % 4];
        let sym = symmetrize(&DiagonalInstrument::random(n, d, &mut rng));
        let g = sym
            .replicated_povm(&CMatrix::identity(d, d))
            .expect("unitary");
        let f_seed = fidelity_seed(&g);
        dual = dual.max((f_seed - fidelity_class_sum(&sym)).abs());
        match mixture_decompose(&g, 1e-9) {
            Ok(m) => {
                lambda_link =
                    lambda_link.max((m.lambda - crate::metrics::lambda_from_f(f_seed, d)).abs());
                structure = structure.max(m.offdiag_residual.max(m.diag_spread));
            }
            Err(_) => structure = f64::INFINITY,
        }
    }
    r.below("seed and class-sum fidelities agree", dual, 1e-12);
    r.below("mixture λ matches (dF-1)/(d-1)", lambda_link, 1e-12);
    r.below("symmetrized POVMs have mixture form", structure, 1e-9);
    r.checks
}

pub fn learning(_seed: u64) -> Vec<Check> {
    let mut r = Recorder::new("learning");
    let mut worst: f64 = 0.0;
    for d in 2..=8 {
        let df = d as f64;
        worst = worst.max((optimize_1to1(d).expect("d >= 2").f - (df + 1.0) / (df * df)).abs());
    }
    r.below("1→1 optimum equals (d+1)/d²", worst, 1e-12);

    let f2 = optimize_2to1(2).expect("d >= 2");
    r.below("2→1 qubit optimum near 0.8114", (f2.f - 0.8114).abs(), 5e-4);
    let t_exact = (13.0 + 2.0 * 13f64.sqrt()) / 78.0;
    r.below(
        "2→1 qubit optimal t₊",
        (f2.t_plus.unwrap_or(f64::NAN) - t_exact).abs(),
        1e-9,
    );

    let mut e2e: f64 = 0.0;
    for d in 2..=6 {
        let sol = optimize_2to1(d).expect("d >= 2");
        match build_instrument(&sol)
            .and_then(|inst| Ok(inst.replicated_povm(&CMatrix::identity(d, d))?))
        {
            Ok(g) => e2e = e2e.max((fidelity_seed(&g) - sol.f).abs()),
            Err(_) => e2e = f64::INFINITY,
        }
    }
    r.below(
        "2→1 replicated fidelity matches the scalar optimum (d=2..6)",
        e2e,
        1e-8,
    );

    for (n, d) in [(1, 2), (2, 2)] {
        match crosscheck_sdp(n, d) {
            Ok(cc) => r.below(
                format!("SDP reproduces the N={n} d={d} optimum"),
                cc.abs_error,
                1e-6,
            ),
            Err(_) => r.failed(format!("SDP reproduces the N={n} d={d} optimum")),
        }
    }

    match (
        optimize_3to1_qubit(Mode::Sequential),
        optimize_3to1_qubit(Mode::Parallel),
    ) {
        (Ok(seq), Ok(par)) => {
            r.below(
                "3→1 sequential optimum near 0.87",
                (seq.f - 0.87).abs(),
                0.01,
            );
            r.holds(
                "3→1 parallel optimum strictly below sequential",
                seq.f - par.f > 1e-6,
                seq.f - par.f,
            );
            r.holds(
                "F(1→1) < F(2→1) < F(3→1) at d=2",
                0.75 < f2.f && f2.f < seq.f,
                seq.f,
            );
        }
        _ => r.failed("3→1 SDP solves"),
    }
    r.checks
}
