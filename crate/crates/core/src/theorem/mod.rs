//! Constructive verification of the proof chains: each implication is run
//! on concrete data with its proof-derived constant and recorded as a
//! checked inequality.
//!
//! Measured operator-norm "constants" are sampled lower bounds (random
//! draws plus the structured extremals the proofs use), so every assertion
//! is stated in the direction a lower bound cannot spuriously satisfy:
//! measured value ≤ derived bound. Exact set identities are asserted with
//! zero tolerance; numeric inequalities at relative 1e-9 with an absolute
//! floor of 1e-12.

use alloc::string::String;
use alloc::vec::Vec;

// In no_std builds f64 math comes from this trait; test builds link std
// through dev-dependencies, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::conditions::Mode;
use crate::error::{Error, Result};
use crate::func::{lp_norm, ExponentConfig, SimpleFunction, Weight};
use crate::stopping::{stopped_value, StoppingTime};
use crate::tree::FiltrationTree;

pub mod convergence;
pub mod oneweight;
pub mod sawyer;
pub mod weak;

pub use convergence::{construct_tail_dominator, convergence_defect};
pub use oneweight::one_weight_suite;
pub use sawyer::{sawyer_decomposition, verify_sawyer, verify_strong_chain, SawyerDecomposition};
pub use weak::{
    pointwise_domination_check, verify_weak_equivalences, weak_bilinear_ratio,
    weak_holder_constant, weak_holder_suite,
};

/// Relative tolerance for numeric chain assertions.
pub const REL_TOL: f64 = 1e-9;

/// The unique `k` with `2^k < x ≤ 2^{k+1}`, for positive finite `x`.
///
/// `log2`+`floor` alone can land one shell off at powers of two or after
/// rounding; the follow-up comparisons against exact powers (`powi`) pin
/// the shell bitwise.
pub fn dyadic_shell(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let mut k = x.log2().floor() as i32;
    while pow2(k) >= x {
        k -= 1;
    }
    while pow2(k + 1) < x {
        k += 1;
    }
    k
}

/// `2^k` exactly.
pub fn pow2(k: i32) -> f64 {
    2.0f64.powi(k)
}

/// `|E_nf · E_ng|` per level per leaf.
pub(crate) fn abs_level_products(
    tree: &FiltrationTree<f64>,
    f: &SimpleFunction<f64>,
    g: &SimpleFunction<f64>,
) -> Result<Vec<Vec<f64>>> {
    let mf = tree.martingale(f)?;
    let mg = tree.martingale(g)?;
    Ok(mf
        .iter()
        .zip(&mg)
        .map(|(a, b)| {
            a.values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| (x * y).abs())
                .collect()
        })
        .collect())
}

/// Exact subset enumeration when the tree fits under the cap, seeded
/// sampling otherwise. The sampling budget scales with the leaf count so
/// larger trees are probed proportionally.
pub(crate) fn auto_mode(tree: &FiltrationTree<f64>, exact_cap: usize, seed: u64) -> Mode {
    if tree.leaf_count() <= exact_cap.min(63) {
        Mode::Exact { cap: exact_cap }
    } else {
        Mode::Sampled { budget: 256 + 4 * tree.leaf_count(), seed }
    }
}

/// Absolute floor below which differences are noise.
pub const ABS_TOL: f64 = 1e-12;

/// `lhs ≤ rhs` up to the crate tolerances.
pub fn le_with_tol(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + (REL_TOL * lhs.abs().max(rhs.abs())).max(ABS_TOL)
}

/// One verified inequality `lhs ≤ constant · rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainStep {
    pub step: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub pass: bool,
}

impl ChainStep {
    /// Record and check `lhs ≤ constant · rhs` with the crate tolerances.
    pub fn check(step: impl Into<String>, lhs: f64, constant: f64, rhs: f64) -> Self {
        ChainStep { step: step.into(), lhs, rhs, constant, pass: le_with_tol(lhs, constant * rhs) }
    }

    /// Record an exact count of violations (`lhs` = count, passes iff 0).
    pub fn exact_count(step: impl Into<String>, violations: usize) -> Self {
        ChainStep {
            step: step.into(),
            lhs: violations as f64,
            rhs: 0.0,
            constant: 1.0,
            pass: violations == 0,
        }
    }

    /// Signed slack `lhs - constant·rhs`; positive means violated.
    pub fn margin(&self) -> f64 {
        self.lhs - self.constant * self.rhs
    }
}

/// Verification outcome: the checked steps plus the measured constants
/// they used.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProofChainReport {
    pub steps: Vec<ChainStep>,
    pub constants: Vec<(String, f64)>,
}

impl ProofChainReport {
    pub fn pass(&self) -> bool {
        self.steps.iter().all(|s| s.pass)
    }

    /// Worst signed slack over all steps (negative infinity when empty).
    pub fn margin(&self) -> f64 {
        self.steps.iter().map(ChainStep::margin).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn first_failure(&self) -> Option<&ChainStep> {
        self.steps.iter().find(|s| !s.pass)
    }

    pub fn record(&mut self, name: impl Into<String>, value: f64) {
        self.constants.push((name.into(), value));
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

/// Track the worst-margin instance of a repeated check and summarize it as
/// one step whose pass flag reflects every instance.
pub struct WorstCase {
    step: String,
    constant: f64,
    worst: Option<(f64, f64, f64, f64)>,
    all_pass: bool,
    count: usize,
}

impl WorstCase {
    pub fn new(step: impl Into<String>, constant: f64) -> Self {
        WorstCase { step: step.into(), constant, worst: None, all_pass: true, count: 0 }
    }

    pub fn observe(&mut self, lhs: f64, rhs: f64) {
        let constant = self.constant;
        self.observe_with(lhs, constant, rhs);
    }

    /// Fold in one check with its own constant (for mixed-exponent pools).
    pub fn observe_with(&mut self, lhs: f64, constant: f64, rhs: f64) {
        self.count += 1;
        self.all_pass &= le_with_tol(lhs, constant * rhs);
        let margin = lhs - constant * rhs;
        if self.worst.is_none_or(|(m, ..)| margin > m) {
            self.worst = Some((margin, lhs, constant, rhs));
        }
    }

    /// Number of observations folded in.
    pub fn count(&self) -> usize {
        self.count
    }

    /// The summarizing step, carrying the worst observation's numbers; a
    /// vacuous (never-observed) check passes with zeros.
    pub fn finish(self) -> ChainStep {
        let (_, lhs, constant, rhs) = self.worst.unwrap_or((0.0, 0.0, self.constant, 0.0));
        ChainStep { step: self.step, lhs, rhs, constant, pass: self.all_pass }
    }
}

/// Ratio of Eq.-(2.1) type for one stopping time:
/// `(∫_{{τ<∞}} (|f_τ| |g_τ|)^p v dμ)^{1/p} / (‖f‖_{L^{p1}(ω1)} ‖g‖_{L^{p2}(ω2)})`.
///
/// The integrand is `(|f_τ||g_τ|)^p`: both martingale factors carry the
/// power, as the homogeneity of the two sides requires.
#[allow(clippy::too_many_arguments)]
pub fn stopped_bilinear_ratio(
    tree: &FiltrationTree<f64>,
    v: &Weight<f64>,
    w1: &Weight<f64>,
    w2: &Weight<f64>,
    exps: &ExponentConfig,
    f: &SimpleFunction<f64>,
    g: &SimpleFunction<f64>,
    tau: &StoppingTime,
) -> Result<f64> {
    let nf = lp_norm(tree, f, exps.p1(), w1)?;
    let ng = lp_norm(tree, g, exps.p2(), w2)?;
    if nf == 0.0 || ng == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let ftau = stopped_value(tree, f, tau)?;
    let gtau = stopped_value(tree, g, tau)?;
    let p = exps.p();
    let mut integral = 0.0;
    for leaf in 0..tree.leaf_count() {
        if let (Some(a), Some(b)) = (&ftau[leaf], &gtau[leaf]) {
            let prod = a.abs() * b.abs();
            if prod > 0.0 {
                integral += prod.powf(p) * v.values()[leaf] * tree.masses()[leaf];
            }
        }
    }
    Ok(integral.powf(1.0 / p) / (nf * ng))
}

/// Ratio of Prop.-2.12 type at a single level:
/// `‖E_n f · E_n g‖_{L^p(v)} / (‖f‖_{L^{p1}(ω1)} ‖g‖_{L^{p2}(ω2)})`.
///
/// Taking suprema over `n` and `(f,g)` gives a lower bound for the uniform
/// constant; it coincides with [`stopped_bilinear_ratio`] at `τ ≡ n`.
#[allow(clippy::too_many_arguments)]
pub fn bilinear_en_ratio(
    tree: &FiltrationTree<f64>,
    v: &Weight<f64>,
    exps: &ExponentConfig,
    w1: &Weight<f64>,
    w2: &Weight<f64>,
    n: usize,
    f: &SimpleFunction<f64>,
    g: &SimpleFunction<f64>,
) -> Result<f64> {
    let nf = lp_norm(tree, f, exps.p1(), w1)?;
    let ng = lp_norm(tree, g, exps.p2(), w2)?;
    if nf == 0.0 || ng == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let ef = tree.conditional_expectation(f, n)?;
    let eg = tree.conditional_expectation(g, n)?;
    let num = lp_norm(tree, &ef.pointwise_mul(&eg), exps.p(), v)?;
    Ok(num / (nf * ng))
}
