//! Dominated convergence of the bilinear martingale `E_n f · E_n g` in
//! `L^p(v)`, made effective on a finite filtration.
//!
//! On a finite tree the martingale reaches `f` at the finest level, so
//! `‖E_n f E_n g − fg‖_{L^p(v)}` is exactly zero at `n = N`. The tail
//! dominator construction builds, for any `ε > 0`, the function
//! `y = max{2|f_1 g_1|, …, 2|f_N g_N|, |fg| + 2ε}`:
//! since `y ≥ 2|f_n g_n|` pointwise for every `n ≥ 1`, a leaf with
//! `|f_n g_n| ≥ y` would satisfy `|f_n g_n| ≥ 2|f_n g_n|`, forcing
//! `f_n g_n = 0` there, which contradicts `y ≥ 2ε > 0`. Every superlevel
//! indicator is therefore empty and the tail
//! `sup_{1 ≤ n ≤ N} ‖E_n f E_n g · χ_{{|E_n f E_n g| ≥ y}}‖_{L^p(v)}`
//! is exactly zero, which is ≤ ε for free. Both facts are checked
//! bitwise, not within tolerance: doubling is exact in floating point.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::func::{lp_norm, ExponentConfig, SimpleFunction, Weight};
use crate::tree::FiltrationTree;

use super::{ChainStep, ProofChainReport};

fn check_lengths(tree: &FiltrationTree<f64>, lens: &[usize]) -> Result<()> {
    for &len in lens {
        if len != tree.leaf_count() {
            return Err(Error::LeafCountMismatch { expected: tree.leaf_count(), got: len });
        }
    }
    Ok(())
}

/// Build the tail dominator `y` for `(f, g, ε)` and verify that every
/// superlevel set `{|E_n f E_n g| ≥ y}`, `1 ≤ n ≤ N`, is empty, so the
/// tail supremum is `0 ≤ ε`.
pub fn construct_tail_dominator(
    tree: &FiltrationTree<f64>,
    f: &SimpleFunction<f64>,
    g: &SimpleFunction<f64>,
    v: &Weight<f64>,
    exps: &ExponentConfig,
    eps: f64,
) -> Result<(SimpleFunction<f64>, ProofChainReport)> {
    check_lengths(tree, &[f.len(), g.len(), v.len()])?;
    if eps <= 0.0 || !eps.is_finite() {
        return Err(Error::DegenerateInput("tail dominator needs a positive epsilon"));
    }
    let leaf_count = tree.leaf_count();
    let marts_f = tree.martingale(f)?;
    let marts_g = tree.martingale(g)?;
    let products: Vec<Vec<f64>> = marts_f
        .iter()
        .zip(&marts_g)
        .map(|(mf, mg)| {
            mf.values().iter().zip(mg.values()).map(|(a, b)| a * b).collect()
        })
        .collect();
    let y: Vec<f64> = (0..leaf_count)
        .map(|leaf| {
            let base = (f.values()[leaf] * g.values()[leaf]).abs() + 2.0 * eps;
            products[1..]
                .iter()
                .map(|row| 2.0 * row[leaf].abs())
                .fold(base, f64::max)
        })
        .collect();

    let mut nonempty = 0usize;
    let mut tail = 0.0f64;
    for row in &products[1..] {
        let cut: Vec<f64> = row
            .iter()
            .zip(&y)
            .map(|(&prod, &yy)| if prod.abs() >= yy { prod } else { 0.0 })
            .collect();
        nonempty += cut.iter().filter(|&&x| x != 0.0).count();
        tail = tail.max(lp_norm(tree, &SimpleFunction::new(cut), exps.p(), v)?);
    }

    let mut report = ProofChainReport::default();
    report.steps.push(ChainStep::exact_count("tail_indicator_empty", nonempty));
    report.steps.push(ChainStep {
        step: "tail_le_eps".into(),
        lhs: tail,
        rhs: eps,
        constant: 1.0,
        pass: tail <= eps,
    });
    report.record("tail", tail);
    report.record("eps", eps);
    Ok((SimpleFunction::new(y), report))
}

/// `‖E_n f · E_n g − fg‖_{L^p(v)}` at a single level `n`.
pub fn convergence_defect(
    tree: &FiltrationTree<f64>,
    f: &SimpleFunction<f64>,
    g: &SimpleFunction<f64>,
    v: &Weight<f64>,
    exps: &ExponentConfig,
    n: usize,
) -> Result<f64> {
    check_lengths(tree, &[f.len(), g.len(), v.len()])?;
    if n >= tree.num_levels() {
        return Err(Error::LevelOutOfRange { level: n, max: tree.last_level() });
    }
    let en_f = tree.conditional_expectation(f, n)?;
    let en_g = tree.conditional_expectation(g, n)?;
    let diff = en_f.pointwise_mul(&en_g).pointwise_sub(&f.pointwise_mul(g));
    lp_norm(tree, &diff, exps.p(), v)
}
