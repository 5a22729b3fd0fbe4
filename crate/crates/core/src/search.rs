//! Seeded random instances and derivative-free search over weight space.
//!
//! The objectives are the ratios of measured constants to their theorem
//! bounds: each is ≤ its bound on every instance if the theory holds, so
//! maximizing them probes sharpness. Objectives contain maximal operators
//! and weak norms (max/indicator nonsmoothness), so the climber uses
//! coordinate-wise multiplicative perturbations, annealed geometrically,
//! with strict-improvement acceptance; all randomness flows from one
//! seeded generator per call and results embed the instance so any value
//! can be replayed.

use alloc::vec::Vec;

// In no_std builds f64 math comes from this trait; test builds link std
// through dev-dependencies, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::conditions::{
    a_vec_p_constant, rh_constant, s_vec_p_constant, Mode, DEFAULT_EXACT_CAP,
};
use crate::error::{Error, Result};
use crate::func::{dual_weight, lp_norm, ExponentConfig, SimpleFunction, Weight};
use crate::maximal::bisublinear_maximal;
use crate::sample::{
    lognormal_weight, nonneg_function, random_masses, rng_for, signed_function,
};
use crate::theorem::weak::{hitting_closure, structured_stopped_max};
use crate::theorem::weak_bilinear_ratio;
use crate::tree::FiltrationTree;

/// Recipe for one random instance.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    /// Dyadic tree depth (leaf count `2^depth`), at most 8.
    pub depth: usize,
    pub p1: f64,
    pub p2: f64,
    /// σ-parameter of the log-normal leaf weights.
    pub weight_sigma: f64,
    /// σ-parameter of the log-normal function magnitudes.
    pub function_sigma: f64,
    /// Couple `v = ω1^{p/p1} ω2^{p/p2}` instead of drawing `v` freely.
    pub coupled_v: bool,
    /// Draw `f, g ≥ 0` instead of random-signed.
    pub nonneg_functions: bool,
    /// Draw leaf masses randomly (normalized) instead of uniform.
    pub random_masses: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            depth: 2,
            p1: 2.0,
            p2: 2.0,
            weight_sigma: 0.5,
            function_sigma: 1.0,
            coupled_v: false,
            nonneg_functions: false,
            random_masses: false,
        }
    }
}

/// One fully specified problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub tree: FiltrationTree<f64>,
    pub v: Weight<f64>,
    pub w1: Weight<f64>,
    pub w2: Weight<f64>,
    pub exps: ExponentConfig,
    pub f: SimpleFunction<f64>,
    pub g: SimpleFunction<f64>,
}

/// Draw a deterministic instance from a config and a seed.
pub fn random_instance(cfg: &GeneratorConfig, seed: u64) -> Result<Instance> {
    if cfg.depth > 8 {
        return Err(Error::BadSpec(alloc::format!("generator depth {} exceeds 8", cfg.depth)));
    }
    for p in [cfg.p1, cfg.p2] {
        if !(p > 1.0 && p < 16.0) {
            return Err(Error::BadSpec(alloc::format!("generator exponent {p} outside (1, 16)")));
        }
    }
    let exps = ExponentConfig::new(cfg.p1, cfg.p2)?;
    let leaf_count = 1usize << cfg.depth;
    let mut rng = rng_for(seed, 0);
    let masses = if cfg.random_masses {
        Some(random_masses(&mut rng, leaf_count, cfg.weight_sigma))
    } else {
        None
    };
    let tree = FiltrationTree::build_dyadic(cfg.depth, masses)?;
    let w1 = lognormal_weight(&mut rng, leaf_count, cfg.weight_sigma);
    let w2 = lognormal_weight(&mut rng, leaf_count, cfg.weight_sigma);
    let v = if cfg.coupled_v {
        w1.pow(exps.p() / exps.p1()).pointwise_mul(&w2.pow(exps.p() / exps.p2()))
    } else {
        lognormal_weight(&mut rng, leaf_count, cfg.weight_sigma)
    };
    let (f, g) = if cfg.nonneg_functions {
        (
            nonneg_function(&mut rng, leaf_count, cfg.function_sigma),
            nonneg_function(&mut rng, leaf_count, cfg.function_sigma),
        )
    } else {
        (
            signed_function(&mut rng, leaf_count, cfg.function_sigma),
            signed_function(&mut rng, leaf_count, cfg.function_sigma),
        )
    };
    Ok(Instance { tree, v, w1, w2, exps, f, g })
}

/// Seed used inside objective evaluation for sampled subset suprema, so an
/// objective is a pure function of the instance.
const OBJECTIVE_SEED: u64 = 0x6d61_7277_6569;

fn objective_mode(tree: &FiltrationTree<f64>) -> Mode {
    if tree.leaf_count() <= DEFAULT_EXACT_CAP {
        Mode::exact()
    } else {
        Mode::Sampled { budget: 128 + 4 * tree.leaf_count(), seed: OBJECTIVE_SEED }
    }
}

/// Ratio-to-bound objectives; each is ≤ 1 (or ≤ `c_w` for the weak form)
/// whenever the corresponding theorem holds, so `maximize` probes
/// sharpness and `rh_violation_probe` hunts for large reverse-Hölder
/// constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchObjective {
    /// max weak ratio over the instance pair and structured pairs, divided
    /// by `[A_p⃗]`; bounded by `c_w(p1,p2)`.
    WeakOverApvec,
    /// `[A_p⃗]^p / (C₁^p · C_RH)` with `C₁` from structured triples and the
    /// instance pair's hitting closure; bounded by 1.
    ApvecOverStoppedTimesRh,
    /// max strong ratio over the instance pair and indicator pairs,
    /// divided by `4 (C_S^p C_RH)^{1/p} p1' p2'`; bounded by 1.
    StrongOverSpvecRh,
    /// `C_RH` itself (≥ 1 always; growth shows how far from equal-ness the
    /// weight pair can be pushed).
    RhViolationProbe,
}

impl SearchObjective {
    pub fn name(&self) -> &'static str {
        match self {
            SearchObjective::WeakOverApvec => "weak_over_apvec",
            SearchObjective::ApvecOverStoppedTimesRh => "apvec_over_stopped_times_rh",
            SearchObjective::StrongOverSpvecRh => "strong_over_spvec_rh",
            SearchObjective::RhViolationProbe => "rh_violation_probe",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "weak_over_apvec" => Some(SearchObjective::WeakOverApvec),
            "apvec_over_stopped_times_rh" => Some(SearchObjective::ApvecOverStoppedTimesRh),
            "strong_over_spvec_rh" => Some(SearchObjective::StrongOverSpvecRh),
            "rh_violation_probe" => Some(SearchObjective::RhViolationProbe),
            _ => None,
        }
    }

    pub fn all() -> [SearchObjective; 4] {
        [
            SearchObjective::WeakOverApvec,
            SearchObjective::ApvecOverStoppedTimesRh,
            SearchObjective::StrongOverSpvecRh,
            SearchObjective::RhViolationProbe,
        ]
    }

    /// Evaluate the objective on one instance; deterministic.
    pub fn evaluate(&self, inst: &Instance) -> Result<f64> {
        let Instance { tree, v, w1, w2, exps, f, g } = inst;
        let mode = objective_mode(tree);
        match self {
            SearchObjective::WeakOverApvec => {
                let avec = a_vec_p_constant(tree, v, w1, w2, exps)?;
                let s1 = dual_weight(w1, exps.p1())?;
                let s2 = dual_weight(w2, exps.p2())?;
                let s1f = s1.as_function();
                let s2f = s2.as_function();
                let mut best = match weak_bilinear_ratio(tree, v, w1, w2, exps, f, g) {
                    Ok(r) => r,
                    Err(Error::ZeroDenominator) => {
                        return Err(Error::ObjectiveEvaluationFailure(
                            "instance functions have zero norm",
                        ))
                    }
                    Err(e) => return Err(e),
                };
                for n in 0..tree.num_levels() {
                    for atom in tree.atoms(n)? {
                        let r = weak_bilinear_ratio(
                            tree,
                            v,
                            w1,
                            w2,
                            exps,
                            &s1f.restrict(atom),
                            &s2f.restrict(atom),
                        )?;
                        best = best.max(r);
                    }
                }
                Ok(best / avec.value)
            }
            SearchObjective::ApvecOverStoppedTimesRh => {
                let avec = a_vec_p_constant(tree, v, w1, w2, exps)?;
                let crh = rh_constant(tree, w1, w2, exps, mode)?;
                let mut c1 = structured_stopped_max(tree, v, w1, w2, exps)?;
                match hitting_closure(tree, v, w1, w2, exps, f, g) {
                    Ok(cl) => c1 = c1.max(cl.stopped_max),
                    Err(Error::ZeroDenominator) => {}
                    Err(e) => return Err(e),
                }
                if c1 == 0.0 {
                    return Err(Error::ObjectiveEvaluationFailure(
                        "stopped ratio pool is degenerate",
                    ));
                }
                Ok(avec.value.powf(exps.p()) / (c1.powf(exps.p()) * crh.value))
            }
            SearchObjective::StrongOverSpvecRh => {
                let cs = s_vec_p_constant(tree, v, w1, w2, exps, mode)?;
                let crh = rh_constant(tree, w1, w2, exps, mode)?;
                let bound = 4.0
                    * (cs.value.powf(exps.p()) * crh.value).powf(1.0 / exps.p())
                    * exps.p1_prime()
                    * exps.p2_prime();
                let s1 = dual_weight(w1, exps.p1())?;
                let s2 = dual_weight(w2, exps.p2())?;
                let s1f = s1.as_function();
                let s2f = s2.as_function();
                let mut pairs: Vec<(SimpleFunction<f64>, SimpleFunction<f64>)> =
                    alloc::vec![(f.clone(), g.clone())];
                for n in 0..tree.num_levels() {
                    for atom in tree.atoms(n)? {
                        let ind = SimpleFunction::indicator(atom, tree.leaf_count());
                        pairs.push((ind.clone(), ind));
                    }
                }
                let mut best = 0.0f64;
                let mut seen = false;
                for (ff, gg) in &pairs {
                    let nf = lp_norm(tree, ff, exps.p1(), &s1)?;
                    let ng = lp_norm(tree, gg, exps.p2(), &s2)?;
                    if nf == 0.0 || ng == 0.0 {
                        continue;
                    }
                    let u = bisublinear_maximal(
                        tree,
                        &ff.pointwise_mul(&s1f),
                        &gg.pointwise_mul(&s2f),
                    )?;
                    best = best.max(lp_norm(tree, &u, exps.p(), v)? / (nf * ng));
                    seen = true;
                }
                if !seen {
                    return Err(Error::ObjectiveEvaluationFailure(
                        "strong ratio pool is degenerate",
                    ));
                }
                Ok(best / bound)
            }
            SearchObjective::RhViolationProbe => Ok(rh_constant(tree, w1, w2, exps, mode)?.value),
        }
    }
}

/// Knobs of the climber beyond the objective itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClimbOptions {
    /// Also perturb leaf masses (renormalized to total mass 1). Off by
    /// default: weight moves keep the probability space fixed.
    pub perturb_masses: bool,
}

/// Outcome of one climb; `best_instance` embeds everything needed to
/// replay `best_value`.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best_value: f64,
    pub best_instance: Instance,
    /// `(iteration, value)` at the start and at every accepted move.
    pub trace: Vec<(u64, f64)>,
    pub seed: u64,
    pub budget: u64,
}

fn scaled_weight(w: &Weight<f64>, leaf: usize, factor: f64) -> Result<Weight<f64>> {
    let mut values = w.values().to_vec();
    values[leaf] *= factor;
    Weight::new(values)
}

/// Coordinate hill climb: one multiplicative move `exp(±δ)` on one leaf of
/// one weight per iteration, `δ` annealed geometrically from 0.5 down to
/// 0.01, strict improvement accepted. Zero budget returns the start value.
pub fn hill_climb(
    objective: SearchObjective,
    start: &Instance,
    budget: u64,
    seed: u64,
) -> Result<SearchResult> {
    hill_climb_with(objective, start, budget, seed, ClimbOptions::default())
}

/// `hill_climb` with explicit options.
pub fn hill_climb_with(
    objective: SearchObjective,
    start: &Instance,
    budget: u64,
    seed: u64,
    options: ClimbOptions,
) -> Result<SearchResult> {
    let mut best = start.clone();
    let mut best_value = objective.evaluate(&best)?;
    let mut trace = alloc::vec![(0u64, best_value)];
    let mut rng = rng_for(seed, 0);
    let leaf_count = start.tree.leaf_count();
    let coords = if options.perturb_masses { 4 } else { 3 };
    for iter in 1..=budget {
        let frac =
            if budget <= 1 { 1.0 } else { (iter - 1) as f64 / (budget - 1) as f64 };
        let delta = 0.5 * (0.01f64 / 0.5).powf(frac);
        let which = rng.gen_range(0..coords);
        let leaf = rng.gen_range(0..leaf_count);
        let factor = if rng.gen::<bool>() { delta.exp() } else { (-delta).exp() };
        let mut cand = best.clone();
        match which {
            0 => cand.v = scaled_weight(&cand.v, leaf, factor)?,
            1 => cand.w1 = scaled_weight(&cand.w1, leaf, factor)?,
            2 => cand.w2 = scaled_weight(&cand.w2, leaf, factor)?,
            _ => {
                let mut masses = cand.tree.masses().to_vec();
                masses[leaf] *= factor;
                let total: f64 = masses.iter().sum();
                for m in &mut masses {
                    *m /= total;
                }
                cand.tree = FiltrationTree::new(masses, cand.tree.levels().to_vec())?;
            }
        }
        let value = objective.evaluate(&cand)?;
        if value > best_value {
            best = cand;
            best_value = value;
            trace.push((iter, value));
        }
    }
    Ok(SearchResult { best_value, best_instance: best, trace, seed, budget })
}

/// One instance examined by the necessity probe.
#[derive(Clone, Debug, PartialEq)]
pub struct NecessityEntry {
    /// `[A_p⃗]^p / (C₁^p · C_RH)`; ≤ 1 when the necessity chain holds, and
    /// the closer to 1 the sharper the instance.
    pub gap: f64,
    pub c_rh: f64,
    pub a_vec: f64,
    pub c1: f64,
    /// `C_RH = 1` branch: weights drawn equal with `p1 = p2`, where
    /// reverse Hölder degenerates to an identity.
    pub equal_weights: bool,
    pub instance: Instance,
}

/// Ranked outcome of [`necessity_probe`], gaps nonincreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct NecessityReport {
    pub entries: Vec<NecessityEntry>,
    pub seed: u64,
    pub budget: u64,
}

/// Scan seeded random instances for sharpness of the necessity chain
/// `[A_p⃗]^p ≤ C₁^p · C_RH`. Every fifth instance uses equal weights with
/// `p1 = p2`, pinning `C_RH = 1` so the gap is exactly `[A_p⃗]^p / C₁^p`.
/// Entries come back ranked by gap, largest first.
pub fn necessity_probe(budget: u64, seed: u64) -> Result<NecessityReport> {
    const EXP_CYCLE: [(f64, f64); 5] =
        [(2.0, 2.0), (2.0, 4.0), (3.0, 1.5), (1.5, 1.5), (4.0, 4.0)];
    let mut entries = Vec::new();
    for t in 0..budget {
        let depth = 1 + (t % 3) as usize;
        let (p1, p2) = EXP_CYCLE[(t % 5) as usize];
        let equal_weights = t % 5 == 0;
        let cfg = GeneratorConfig { depth, p1, p2, ..GeneratorConfig::default() };
        let mut inst = random_instance(&cfg, seed.wrapping_add(t))?;
        if equal_weights {
            inst.w2 = inst.w1.clone();
        }
        let avec = a_vec_p_constant(&inst.tree, &inst.v, &inst.w1, &inst.w2, &inst.exps)?;
        let crh =
            rh_constant(&inst.tree, &inst.w1, &inst.w2, &inst.exps, objective_mode(&inst.tree))?;
        let mut c1 =
            structured_stopped_max(&inst.tree, &inst.v, &inst.w1, &inst.w2, &inst.exps)?;
        match hitting_closure(
            &inst.tree,
            &inst.v,
            &inst.w1,
            &inst.w2,
            &inst.exps,
            &inst.f,
            &inst.g,
        ) {
            Ok(cl) => c1 = c1.max(cl.stopped_max),
            Err(Error::ZeroDenominator) => {}
            Err(e) => return Err(e),
        }
        let gap = avec.value.powf(inst.exps.p()) / (c1.powf(inst.exps.p()) * crh.value);
        entries.push(NecessityEntry {
            gap,
            c_rh: crh.value,
            a_vec: avec.value,
            c1,
            equal_weights,
            instance: inst,
        });
    }
    entries.sort_by(|a, b| b.gap.total_cmp(&a.gap));
    Ok(NecessityReport { entries, seed, budget })
}
