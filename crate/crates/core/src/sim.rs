//! Monte Carlo run of the optimal `1 → 1` storage and retrieval circuit.
//!
//! Storage: one half of `|ω⟩/√d` is measured by the unknown device,
//! outcome `k` with probability `1/d`, leaving `U*|k⟩` on the other half.
//! Retrieval: `{P^p, P^q}` is measured on the fresh input and the stored
//! half. On `p` the output is `k`; on `q` it is drawn uniformly from the
//! other `d - 1` labels.
//!
//! Draws per shot, all from one seeded stream: `k`, then the branch, then
//! (on `q` only) the replacement label.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::comb::{unitarity_deviation, CombError};
use crate::learn::{build_instrument, optimize_1to1, LearnError};
use crate::CMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Comb(#[from] CombError),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub d: usize,
    pub u: CMatrix,
    pub psi: DVector<Complex64>,
    pub shots: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if self.d < 2 {
            return bad(format!("d must be at least 2, got {}", self.d));
        }
        if self.u.nrows() != self.d || self.u.ncols() != self.d {
            return bad(format!("unitary must be {0}x{0}", self.d));
        }
        let dev = unitarity_deviation(&self.u);
        if dev > 1e-9 {
            return bad(format!("matrix is not unitary (deviation {dev:.3e})"));
        }
        if self.psi.len() != self.d {
            return bad(format!("state must have {} amplitudes", self.d));
        }
        if (self.psi.norm() - 1.0).abs() > 1e-9 {
            return bad(format!(
                "state is not normalized (norm {})",
                self.psi.norm()
            ));
        }
        if self.shots == 0 {
            return bad("shots must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub d: usize,
    pub shots: u64,
    pub seed: u64,
    pub counts: Vec<u64>,
    pub empirical: Vec<f64>,
    /// `⟨ψ|G_i^(U)|ψ⟩` of the optimal instrument.
    pub analytic: Vec<f64>,
    /// `(empirical - analytic)` in binomial standard errors.
    pub sigma_distances: Vec<f64>,
    pub p_branch_rate: f64,
    pub p_branch_expected: f64,
    pub p_branch_sigma: f64,
    /// Shots on the `p` branch whose output differed from `k`.
    pub p_branch_mismatches: u64,
}

impl SimResult {
    /// All outcome frequencies and the branch rate within `n_sigma`.
    pub fn consistent(&self, n_sigma: f64) -> bool {
        self.sigma_distances.iter().all(|s| s.abs() <= n_sigma)
            && self.p_branch_sigma.abs() <= n_sigma
            && self.p_branch_mismatches == 0
    }
}

fn binomial_sigma(freq: f64, p: f64, n: u64) -> f64 {
    let se = (p * (1.0 - p) / n as f64).sqrt();
    if se > 0.0 {
        (freq - p) / se
    } else if (freq - p).abs() < 1e-15 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Outcome of the retrieval measurement `{P^p, P^q}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    P,
    Q,
}

/// `f(k, n)`: `k` on the `p` branch, otherwise a uniform label `j ≠ k`.
pub fn post_process<R: Rng + ?Sized>(k: usize, branch: Branch, d: usize, rng: &mut R) -> usize {
    match branch {
        Branch::P => k,
        Branch::Q => {
            let j = rng.random_range(0..d - 1);
            if j >= k {
                j + 1
            } else {
                j
            }
        }
    }
}

pub fn simulate_1to1(cfg: &SimConfig) -> Result<SimResult, SimError> {
    cfg.validate()?;
    let d = cfg.d;
    // |⟨φ_k|ψ⟩|² / d with φ_k = U|k⟩.
    let p_branch: Vec<f64> = (0..d)
        .map(|k| (cfg.u.column(k).adjoint() * &cfg.psi)[(0, 0)].norm_sqr() / d as f64)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut counts = vec![0u64; d];
    let mut p_hits = 0u64;
    let mut mismatches = 0u64;
    for _ in 0..cfg.shots {
        let k = rng.random_range(0..d);
        let branch = if rng.random::<f64>() < p_branch[k] {
            Branch::P
        } else {
            Branch::Q
        };
        let out = post_process(k, branch, d, &mut rng);
        if branch == Branch::P {
            p_hits += 1;
            if out != k {
                mismatches += 1;
            }
        }
        counts[out] += 1;
    }

    let inst = build_instrument(&optimize_1to1(d)?)?;
    let analytic = inst.replicated_povm(&cfg.u)?.probabilities(&cfg.psi);
    let n = cfg.shots;
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let sigma_distances = empirical
        .iter()
        .zip(&analytic)
        .map(|(&f, &p)| binomial_sigma(f, p, n))
        .collect();
    let p_branch_rate = p_hits as f64 / n as f64;
    let p_branch_expected = p_branch.iter().sum::<f64>() / d as f64;
    Ok(SimResult {
        d,
        shots: n,
        seed: cfg.seed,
        counts,
        empirical,
        analytic,
        sigma_distances,
        p_branch_rate,
        p_branch_expected,
        p_branch_sigma: binomial_sigma(p_branch_rate, p_branch_expected, n),
        p_branch_mismatches: mismatches,
    })
}
