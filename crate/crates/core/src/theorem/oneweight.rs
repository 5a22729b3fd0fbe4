//! One-weight boundedness of the conditional expectations and the Doob
//! maximal operator on `L^p(ω)`.
//!
//! For `p > 1` and a weight `ω` with dual `σ = ω^{-1/(p-1)}`, each atom
//! gives `|E_n f| ≤ E_n(|f|^p ω)^{1/p} E_n(σ)^{1/p'}` by Hölder, and the
//! `A_p` condition bounds `E_n(σ)^{p-1} ≤ [A_p]/E_n(ω)`. Integrating and
//! using the self-adjointness identity `∫ E_n(h) ω/E_n(ω) dμ = ∫ h dμ`
//! yields the uniform operator bound
//! `‖E_n f‖_{L^p(ω)} ≤ [A_p]^{1/p} ‖f‖_{L^p(ω)}`,
//! independent of the level. The suite measures the sampled ratios for
//! both `E_n` and `M`, asserts `E_n`-ratio ≤ `M`-ratio pointwise in the
//! sample and the derived `[A_p]^{1/p}` bound, and checks that the defect
//! `‖E_N f − f‖_{L^p(ω)}` at the finest level is exactly zero (the finest
//! partition is the leaf partition, so `E_N` is the identity bitwise).

// In no_std builds f64 math comes from this trait; test builds link std
// through dev-dependencies, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::conditions::a_p_constant;
use crate::error::{Error, Result};
use crate::func::{lp_norm, Weight};
use crate::maximal::doob_maximal;
use crate::sample::{rng_for, signed_function};
use crate::tree::FiltrationTree;

use super::{ChainStep, ProofChainReport, WorstCase};

/// Sampled one-weight suite; see the module doc for the inequalities.
pub fn one_weight_suite(
    tree: &FiltrationTree<f64>,
    omega: &Weight<f64>,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<ProofChainReport> {
    if omega.len() != tree.leaf_count() {
        return Err(Error::LeafCountMismatch { expected: tree.leaf_count(), got: omega.len() });
    }
    let a_p = a_p_constant(tree, omega, omega, p)?;
    let mut en_vs_m = WorstCase::new("en_ratio_le_m_ratio", 1.0);
    let mut en_vs_ap = WorstCase::new("en_ratio_le_ap_power", a_p.value.powf(1.0 / p));
    let mut defect_nonzero = 0usize;
    let mut nonfinite = 0usize;
    let mut en_sup = 0.0f64;
    let mut m_sup = 0.0f64;
    for t in 0..trials {
        let mut rng = rng_for(seed, (3u64 << 32) | t);
        let f = signed_function(&mut rng, tree.leaf_count(), 1.0);
        let norm = lp_norm(tree, &f, p, omega)?;
        let marts = tree.martingale(&f)?;
        let mut r_max = 0.0f64;
        for m in &marts {
            let r = lp_norm(tree, m, p, omega)? / norm;
            if !r.is_finite() {
                nonfinite += 1;
            }
            r_max = r_max.max(r);
        }
        let m_ratio = lp_norm(tree, &doob_maximal(tree, &f)?, p, omega)? / norm;
        if !m_ratio.is_finite() {
            nonfinite += 1;
        }
        en_vs_m.observe(r_max, m_ratio);
        en_vs_ap.observe(r_max, 1.0);
        en_sup = en_sup.max(r_max);
        m_sup = m_sup.max(m_ratio);
        let defect =
            lp_norm(tree, &marts[tree.last_level()].pointwise_sub(&f), p, omega)?;
        if defect != 0.0 {
            defect_nonzero += 1;
        }
    }
    let mut report = ProofChainReport::default();
    report.steps.push(en_vs_m.finish());
    report.steps.push(en_vs_ap.finish());
    report.steps.push(ChainStep::exact_count("defect_at_finest_zero", defect_nonzero));
    report.steps.push(ChainStep::exact_count("all_ratios_finite", nonfinite));
    report.record("a_p", a_p.value);
    report.record("en_sup", en_sup);
    report.record("m_sup", m_sup);
    report.record("p", p);
    report.record("trials", trials as f64);
    Ok(report)
}
