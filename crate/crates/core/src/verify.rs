//! Randomized sweeps over the [`theory`](crate::theory) results and the
//! closed-form ridge representation, each compared with an independently
//! computed reference. Used by the `verify` command.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::graph::ridge_self_representation;
use crate::linalg::sorted_symmetric_eigen;
use crate::matrix_io::DataMatrix;
use crate::theory::{
    denoised_representation, first_principal_angle, lemma2_check, lemma3_condition, min_l2_solution,
    nuclear_min_representation, optimal_k, SubspacePair,
};

/// Outcome of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub instances: usize,
    pub passed: usize,
    pub worst_residual: f64,
    /// Hard checks fail the verification run; soft ones are informational.
    pub hard: bool,
    pub witness: Option<String>,
}

impl CheckResult {
    pub fn ok(&self) -> bool {
        !self.hard || self.passed == self.instances
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: instances={} passed={} worst_residual={:.3e}{}",
            self.name,
            self.instances,
            self.passed,
            self.worst_residual,
            if self.hard { "" } else { " (report only)" }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_hard_checks_pass(&self) -> bool {
        self.checks.iter().all(CheckResult::ok)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    pub instances: usize,
    /// Perturb one closed form so the run must fail (exercises the failure path).
    pub inject_failure: bool,
}

fn instance_rng(seed: u64, check: u64, instance: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(check.wrapping_mul(0x2545_F491_4F6C_DD1D)));
    rng.set_stream(instance as u64);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

struct Tally {
    name: &'static str,
    hard: bool,
    instances: usize,
    passed: usize,
    worst: f64,
    witness: Option<String>,
}

impl Tally {
    fn new(name: &'static str, hard: bool) -> Self {
        Self {
            name,
            hard,
            instances: 0,
            passed: 0,
            worst: 0.0,
            witness: None,
        }
    }

    fn record(&mut self, residual: f64, pass: bool, witness: impl FnOnce() -> String) {
        self.instances += 1;
        self.worst = self.worst.max(residual);
        if pass {
            self.passed += 1;
        } else if self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            instances: self.instances,
            passed: self.passed,
            worst_residual: self.worst,
            hard: self.hard,
            witness: self.witness,
        }
    }
}

pub fn run_verification(opts: VerifyOptions) -> Result<VerifyReport> {
    let checks = vec![
        ridge_closed_form(opts)?,
        nuclear_projector(opts)?,
        optimal_rank(opts)?,
        denoised_projector(opts)?,
        angle_invariance(opts)?,
        sufficient_condition(opts, true)?,
        sufficient_condition(opts, false)?,
    ];
    Ok(VerifyReport { checks })
}

/// Per-sample ridge solves over the dictionary with column `i` zeroed.
fn direct_ridge(y: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let n = y.ncols();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut yi = y.clone();
        yi.column_mut(i).fill(0.0);
        let mut system = yi.transpose() * &yi;
        for d in 0..n {
            system[(d, d)] += lambda;
        }
        let rhs = yi.transpose() * y.column(i);
        let c = system.lu().solve(&rhs).expect("ridge system is positive definite");
        out.set_column(i, &c);
    }
    out
}

fn ridge_closed_form(opts: VerifyOptions) -> Result<CheckResult> {
    let mut tally = Tally::new("ridge_closed_form", true);
    for inst in 0..opts.instances.div_ceil(10).max(1) {
        let mut rng = instance_rng(opts.seed, 1, inst);
        let lambda = if inst % 2 == 0 { 0.1 } else { 1.0 };
        let y = gaussian(&mut rng, 30, 40);
        let fast = ridge_self_representation(&DataMatrix::new(y.clone(), "r")?, lambda)?.values;
        let direct = direct_ridge(&y, lambda);
        let rel = (&fast - &direct).norm() / direct.norm();
        tally.record(rel, rel <= 1e-8, || format!("instance {inst}: relative error {rel:e}"));
    }
    Ok(tally.finish())
}

fn random_rank_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, rank: usize) -> DMatrix<f64> {
    gaussian(rng, rows, rank) * gaussian(rng, rank, cols)
}

fn nuclear_projector(opts: VerifyOptions) -> Result<CheckResult> {
    let mut tally = Tally::new("nuclear_min_representation", true);
    for inst in 0..opts.instances {
        let mut rng = instance_rng(opts.seed, 2, inst);
        let rank = 1 + inst % 8;
        let d = random_rank_matrix(&mut rng, 12, 10, rank);
        let mut c = nuclear_min_representation(&d)?;
        if opts.inject_failure && inst == 0 {
            c[(0, 0)] += 1e-3;
        }
        let fit = (&d * &c - &d).norm() / d.norm();
        let sym = (&c - c.transpose()).norm();
        let idem = (&c * &c - &c).norm();
        let nuclear: f64 = c.singular_values().sum();
        let rank_gap = (nuclear - rank as f64).abs();
        let worst = fit.max(sym).max(idem);
        let pass = worst <= 1e-8 && rank_gap <= 1e-6;
        tally.record(worst.max(rank_gap), pass, || {
            format!("instance {inst} (rank {rank}): fit {fit:e}, asym {sym:e}, idempotence {idem:e}, nuclear norm {nuclear}")
        });
    }
    Ok(tally.finish())
}

fn brute_force_k(sigmas: &[f64], alpha: f64) -> usize {
    let costs: Vec<f64> = (0..=sigmas.len())
        .map(|k| k as f64 + alpha / 2.0 * sigmas[k..].iter().map(|s| s * s).sum::<f64>())
        .collect();
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    costs.iter().position(|&c| c == min).expect("nonempty")
}

fn optimal_rank(opts: VerifyOptions) -> Result<CheckResult> {
    let mut tally = Tally::new("optimal_k", true);
    for inst in 0..opts.instances {
        let mut rng = instance_rng(opts.seed, 3, inst);
        let len = rng.random_range(1..=8);
        let mut sigmas: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..3.0)).collect();
        sigmas.sort_by(|a, b| b.total_cmp(a));
        for alpha in [0.0, 0.5, 2.0, 100.0] {
            let got = optimal_k(&sigmas, alpha)?;
            let want = brute_force_k(&sigmas, alpha);
            tally.record((got as f64 - want as f64).abs(), got == want, || {
                format!("sigmas {sigmas:?}, alpha {alpha}: got {got}, brute force {want}")
            });
        }
    }
    Ok(tally.finish())
}

/// Projector onto the top-`k` right singular vectors, via the eigenvectors of `DᵀD`.
fn top_right_projector(d: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let (_, vecs) = sorted_symmetric_eigen(&(d.transpose() * d))?;
    let n = vecs.ncols();
    let top = vecs.columns(n - k, k);
    Ok(top * top.transpose())
}

fn denoised_projector(opts: VerifyOptions) -> Result<CheckResult> {
    let mut tally = Tally::new("denoised_representation", true);
    for inst in 0..opts.instances {
        let mut rng = instance_rng(opts.seed, 4, inst);
        let rank = 1 + inst % 8;
        let d = random_rank_matrix(&mut rng, 12, 10, rank);
        let sigmas: Vec<f64> = {
            let mut s: Vec<f64> = d.singular_values().iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s
        };
        for alpha in [0.0, 0.5, 2.0, 100.0] {
            let k = brute_force_k(&sigmas, alpha);
            let reference = top_right_projector(&d, k)?;
            let got = denoised_representation(&d, alpha)?;
            let err = (&got - &reference).norm();
            tally.record(err, err <= 1e-8, || {
                format!("instance {inst} (rank {rank}), alpha {alpha}: deviation {err:e}")
            });
        }
    }
    Ok(tally.finish())
}

fn angle_invariance(opts: VerifyOptions) -> Result<CheckResult> {
    let mut tally = Tally::new("principal_angle_invariance", true);
    for inst in 0..opts.instances {
        let mut rng = instance_rng(opts.seed, 5, inst);
        let (ra, rb) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let a = gaussian(&mut rng, 10, ra);
        let b = gaussian(&mut rng, 10, rb);
        let mix_a = gaussian(&mut rng, ra, ra);
        let mix_b = gaussian(&mut rng, rb, rb);
        let base = first_principal_angle(&a, &b)?;
        let swapped = first_principal_angle(&b, &a)?;
        let rebased = first_principal_angle(&(&a * mix_a), &(&b * mix_b))?;
        let err = (base - swapped).abs().max((base - rebased).abs());
        tally.record(err, err <= 1e-9, || format!("instance {inst}: angle {base}, deviation {err:e}"));
    }
    Ok(tally.finish())
}

/// Dictionary of `cols` full-column-rank columns whose range contains `shared`.
fn dictionary_through(rng: &mut ChaCha8Rng, shared: &DVector<f64>, cols: usize) -> DMatrix<f64> {
    let m = shared.len();
    let mut basis = gaussian(rng, m, cols);
    basis.set_column(0, shared);
    basis * gaussian(rng, cols, cols)
}

/// When `σ_min(D0) ≥ r_e cos θ ‖De‖_{1,2}` holds, the minimum ℓ2-norm
/// representation over `D0` of a point in both ranges is cheaper than over `De`.
/// With `strict = false` this instead reports how often the joint minimum-norm
/// solution agrees with "error block vanishes iff clean is cheaper".
fn sufficient_condition(opts: VerifyOptions, strict: bool) -> Result<CheckResult> {
    let name = if strict {
        "sufficient_condition_min_norm"
    } else {
        "joint_min_norm_agreement"
    };
    let mut tally = Tally::new(name, strict);
    let mut attempt = 0;
    while tally.instances < opts.instances && attempt < 50 * opts.instances.max(1) {
        let mut rng = instance_rng(opts.seed, 6, attempt);
        attempt += 1;
        let m = 12;
        let shared = {
            let v = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
            &v / v.norm()
        };
        let r0 = rng.random_range(2..=4);
        let re = rng.random_range(1..=3);
        let d0 = dictionary_through(&mut rng, &shared, r0) * rng.random_range(1.0..5.0);
        let mut de = dictionary_through(&mut rng, &shared, re);
        let scale: f64 = rng.random_range(0.02..0.6);
        for mut c in de.column_iter_mut() {
            let norm = c.norm();
            c *= scale / norm;
        }
        let pair = SubspacePair::new(d0, de)?;
        let report = lemma3_condition(&pair)?;
        if !report.holds {
            continue;
        }
        let x = &shared * (rng.sample::<f64, _>(StandardNormal) + 0.5f64.copysign(rng.random::<f64>() - 0.5));
        if strict {
            let z0 = min_l2_solution(&pair.d0, &x)?;
            let ze = min_l2_solution(&pair.de, &x)?;
            let (a, b) = (z0.norm(), ze.norm());
            tally.record((a / b).max(0.0), a < b, || {
                format!("attempt {attempt}: ‖z0‖ = {a}, ‖ze‖ = {b}, condition {} ≥ {}", report.lhs, report.rhs)
            });
        } else {
            let verdict = lemma2_check(&pair, &x)?;
            tally.record(verdict.error_block_norm, verdict.agrees, || {
                format!(
                    "attempt {attempt}: clean cheaper = {}, error block norm = {:e}",
                    verdict.clean_is_cheaper, verdict.error_block_norm
                )
            });
        }
    }
    Ok(tally.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_passes() {
        let report = run_verification(VerifyOptions {
            seed: 0,
            instances: 20,
            inject_failure: false,
        })
        .unwrap();
        for c in &report.checks {
            assert!(c.ok(), "{c} {:?}", c.witness);
            assert!(c.instances > 0, "{c}");
        }
    }

    #[test]
    fn injected_failure_is_detected() {
        let report = run_verification(VerifyOptions {
            seed: 0,
            instances: 5,
            inject_failure: true,
        })
        .unwrap();
        assert!(!report.all_hard_checks_pass());
    }
}
