//! Weight-condition constants: the reverse Hölder coupling `RH(p1,p2)`,
//! the bilinear `A_p⃗` and testing `S_p⃗` conditions, and their linear
//! couple specializations `A_p`, `S_p`.
//!
//! The `RH` and `S` constants are suprema over stopping times, but both
//! quantities depend on a stopping time only through its active set
//! `{τ < ∞}`, and every leaf set arises as an active set (stop at `N` on
//! the set). The suprema are therefore computed over nonempty leaf
//! subsets: exhaustively in exact mode (leaf count capped), or over a
//! seeded deterministic sample (all atoms, level unions, random subsets)
//! in sampled mode, where the result is a lower bound and flagged
//! `exact: false`. The subset/stopping-time agreement is itself a tested
//! invariant, not an assumption.

use alloc::vec::Vec;

// In no_std builds f64 math comes from this trait; test builds link std
// through dev-dependencies, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::func::{dual_weight, ExponentConfig, Weight};
use crate::tree::FiltrationTree;

/// Default leaf cap for exact (all-subsets) mode.
pub const DEFAULT_EXACT_CAP: usize = 20;

/// Hard architectural cap: exact mode enumerates `u64` bit masks.
const MASK_CAP: usize = 63;

/// How a supremum is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// All nonempty leaf subsets; requires `leaf_count <= cap`.
    Exact { cap: usize },
    /// Atoms, level unions and `budget` seeded random subsets; yields a
    /// lower bound on the true constant.
    Sampled { budget: usize, seed: u64 },
}

impl Mode {
    /// Exact mode at the default cap.
    pub fn exact() -> Self {
        Mode::Exact { cap: DEFAULT_EXACT_CAP }
    }
}

/// Maximizer of a condition constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A level/atom pair, for the constants defined as maxima over atoms.
    LevelAtom { level: usize, atom: usize, leaves: Vec<usize> },
    /// A leaf set `B = {τ < ∞}`, for the subset-supremum constants.
    LeafSet(Vec<usize>),
}

impl Witness {
    /// The witness's leaf set, whichever variant carries it.
    pub fn leaves(&self) -> &[usize] {
        match self {
            Witness::LevelAtom { leaves, .. } => leaves,
            Witness::LeafSet(leaves) => leaves,
        }
    }
}

/// A computed condition constant with its maximizer.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionConstant {
    pub value: f64,
    pub witness: Witness,
    /// True when the supremum was enumerated exhaustively.
    pub exact: bool,
}

/// A quantity evaluated on nonempty leaf subsets. `None` marks subsets on
/// which the quantity is undefined; they are skipped by the supremum.
pub trait SetQuantity {
    fn evaluate(&mut self, b: &[usize]) -> Option<f64>;
}

/// Supremum of a [`SetQuantity`] over nonempty leaf subsets.
///
/// Ties (bitwise-equal values) resolve to the lexicographically smallest
/// sorted leaf set, so the witness is canonical and independent of
/// enumeration order; the exact and oracle paths agree set-for-set.
pub fn sup_over_sets<E: SetQuantity>(
    tree: &FiltrationTree<f64>,
    mode: Mode,
    eval: &mut E,
) -> Result<(f64, Vec<usize>, bool)> {
    let leaves = tree.leaf_count();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let consider = |value: f64, b: &[usize], best: &mut Option<(f64, Vec<usize>)>| {
        let better = match best {
            None => true,
            Some((bv, bs)) => value > *bv || (value == *bv && b < bs.as_slice()),
        };
        if better {
            *best = Some((value, b.to_vec()));
        }
    };
    match mode {
        Mode::Exact { cap } => {
            let cap = cap.min(MASK_CAP);
            if leaves > cap {
                return Err(Error::CapExceeded { leaves, cap });
            }
            let mut b: Vec<usize> = Vec::with_capacity(leaves);
            for mask in 1u64..(1u64 << leaves) {
                b.clear();
                let mut bits = mask;
                while bits != 0 {
                    b.push(bits.trailing_zeros() as usize);
                    bits &= bits - 1;
                }
                if let Some(value) = eval.evaluate(&b) {
                    consider(value, &b, &mut best);
                }
            }
        }
        Mode::Sampled { budget, seed } => {
            for n in 0..tree.num_levels() {
                for atom in tree.atoms(n)? {
                    if let Some(value) = eval.evaluate(atom) {
                        consider(value, atom, &mut best);
                    }
                }
            }
            let mut remaining = budget;
            for n in 0..tree.num_levels() {
                let atoms = tree.atoms(n)?;
                if atoms.len() > MASK_CAP {
                    continue;
                }
                let count = (1u128 << atoms.len()) - 1;
                if count > remaining as u128 {
                    continue;
                }
                for mask in 1u64..(1u64 << atoms.len()) {
                    let mut b: Vec<usize> = Vec::new();
                    for (a, atom) in atoms.iter().enumerate() {
                        if mask >> a & 1 == 1 {
                            b.extend_from_slice(atom);
                        }
                    }
                    b.sort_unstable();
                    if let Some(value) = eval.evaluate(&b) {
                        consider(value, &b, &mut best);
                    }
                }
                remaining -= count as usize;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut drawn = 0;
            while drawn < budget {
                let b: Vec<usize> = (0..leaves).filter(|_| rng.gen::<bool>()).collect();
                if b.is_empty() {
                    continue;
                }
                drawn += 1;
                if let Some(value) = eval.evaluate(&b) {
                    consider(value, &b, &mut best);
                }
            }
        }
    }
    let (value, witness) = best.ok_or(Error::DegenerateInput("no evaluable subset"))?;
    Ok((value, witness, matches!(mode, Mode::Exact { .. })))
}

/// Reverse Hölder quantity of Definition-2.1 type on a fixed weight pair:
/// `B ↦ (∫_B σ1 dμ)^{p/p1} (∫_B σ2 dμ)^{p/p2} / ∫_B σ1^{p/p1} σ2^{p/p2} dμ`.
pub struct RhEvaluator {
    a1: Vec<f64>,
    a2: Vec<f64>,
    a3: Vec<f64>,
    e1: f64,
    e2: f64,
}

impl RhEvaluator {
    pub fn new(
        tree: &FiltrationTree<f64>,
        s1: &Weight<f64>,
        s2: &Weight<f64>,
        exps: &ExponentConfig,
    ) -> Result<Self> {
        let leaves = tree.leaf_count();
        if s1.len() != leaves || s2.len() != leaves {
            return Err(Error::LeafCountMismatch { expected: leaves, got: s1.len().max(s2.len()) });
        }
        let e1 = exps.p() / exps.p1();
        let e2 = exps.p() / exps.p2();
        let mut a1 = Vec::with_capacity(leaves);
        let mut a2 = Vec::with_capacity(leaves);
        let mut a3 = Vec::with_capacity(leaves);
        for leaf in 0..leaves {
            let mu = tree.masses()[leaf];
            let w1 = s1.values()[leaf];
            let w2 = s2.values()[leaf];
            a1.push(w1 * mu);
            a2.push(w2 * mu);
            a3.push(w1.powf(e1) * w2.powf(e2) * mu);
        }
        Ok(RhEvaluator { a1, a2, a3, e1, e2 })
    }
}

impl SetQuantity for RhEvaluator {
    fn evaluate(&mut self, b: &[usize]) -> Option<f64> {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        let mut s3 = 0.0;
        for &leaf in b {
            s1 += self.a1[leaf];
            s2 += self.a2[leaf];
            s3 += self.a3[leaf];
        }
        if s3 == 0.0 {
            return None;
        }
        Some(s1.powf(self.e1) * s2.powf(self.e2) / s3)
    }
}

/// Per-subset bisublinear testing quantity of Definition-2.4 type:
/// `B ↦ (∫_B 𝓜(σ1χ_B, σ2χ_B)^p v dμ)^{1/p} / (|B|_{σ1}^{1/p1} |B|_{σ2}^{1/p2})`.
///
/// Scratch buffers are reused across subsets so exact mode stays
/// allocation-free per subset.
pub struct SvecEvaluator<'t> {
    tree: &'t FiltrationTree<f64>,
    p: f64,
    inv_p1: f64,
    inv_p2: f64,
    a1: Vec<f64>,
    a2: Vec<f64>,
    vmu: Vec<f64>,
    m: Vec<f64>,
    sum1: Vec<f64>,
    sum2: Vec<f64>,
    stamp: Vec<u64>,
    epoch: u64,
}

impl<'t> SvecEvaluator<'t> {
    pub fn new(
        tree: &'t FiltrationTree<f64>,
        v: &Weight<f64>,
        s1: &Weight<f64>,
        s2: &Weight<f64>,
        exps: &ExponentConfig,
    ) -> Result<Self> {
        let leaves = tree.leaf_count();
        for w in [v.len(), s1.len(), s2.len()] {
            if w != leaves {
                return Err(Error::LeafCountMismatch { expected: leaves, got: w });
            }
        }
        let max_atoms = (0..tree.num_levels())
            .map(|n| tree.levels()[n].len())
            .max()
            .unwrap_or(0);
        Ok(SvecEvaluator {
            tree,
            p: exps.p(),
            inv_p1: 1.0 / exps.p1(),
            inv_p2: 1.0 / exps.p2(),
            a1: s1.values().iter().zip(tree.masses()).map(|(w, mu)| w * mu).collect(),
            a2: s2.values().iter().zip(tree.masses()).map(|(w, mu)| w * mu).collect(),
            vmu: v.values().iter().zip(tree.masses()).map(|(w, mu)| w * mu).collect(),
            m: alloc::vec![0.0; leaves],
            sum1: alloc::vec![0.0; max_atoms],
            sum2: alloc::vec![0.0; max_atoms],
            stamp: alloc::vec![0; max_atoms],
            epoch: 0,
        })
    }
}

impl SetQuantity for SvecEvaluator<'_> {
    fn evaluate(&mut self, b: &[usize]) -> Option<f64> {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for &leaf in b {
            s1 += self.a1[leaf];
            s2 += self.a2[leaf];
            self.m[leaf] = 0.0;
        }
        if s1 == 0.0 || s2 == 0.0 {
            return None;
        }
        for n in 0..self.tree.num_levels() {
            self.epoch += 1;
            let leaf_atom = self.tree.leaf_atoms(n).expect("level in range");
            let atom_mass = self.tree.atom_masses(n).expect("level in range");
            for &leaf in b {
                let a = leaf_atom[leaf];
                if self.stamp[a] != self.epoch {
                    self.stamp[a] = self.epoch;
                    self.sum1[a] = 0.0;
                    self.sum2[a] = 0.0;
                }
                self.sum1[a] += self.a1[leaf];
                self.sum2[a] += self.a2[leaf];
            }
            for &leaf in b {
                let a = leaf_atom[leaf];
                let prod = self.sum1[a] * self.sum2[a] / (atom_mass[a] * atom_mass[a]);
                if prod > self.m[leaf] {
                    self.m[leaf] = prod;
                }
            }
        }
        let mut num = 0.0;
        for &leaf in b {
            num += self.m[leaf].powf(self.p) * self.vmu[leaf];
        }
        Some(num.powf(1.0 / self.p) / (s1.powf(self.inv_p1) * s2.powf(self.inv_p2)))
    }
}

/// Linear testing quantity of Corollary-2.10 type:
/// `B ↦ (∫_B M(σχ_B)^p v dμ)^{1/p} / |B|_σ^{1/p}`.
pub struct SpEvaluator<'t> {
    tree: &'t FiltrationTree<f64>,
    p: f64,
    a: Vec<f64>,
    vmu: Vec<f64>,
    m: Vec<f64>,
    sum: Vec<f64>,
    stamp: Vec<u64>,
    epoch: u64,
}

impl<'t> SpEvaluator<'t> {
    pub fn new(
        tree: &'t FiltrationTree<f64>,
        v: &Weight<f64>,
        sigma: &Weight<f64>,
        p: f64,
    ) -> Result<Self> {
        let leaves = tree.leaf_count();
        for w in [v.len(), sigma.len()] {
            if w != leaves {
                return Err(Error::LeafCountMismatch { expected: leaves, got: w });
            }
        }
        if p <= 1.0 || !p.is_finite() {
            return Err(Error::ExponentOutOfRange { value: p });
        }
        let max_atoms = (0..tree.num_levels())
            .map(|n| tree.levels()[n].len())
            .max()
            .unwrap_or(0);
        Ok(SpEvaluator {
            tree,
            p,
            a: sigma.values().iter().zip(tree.masses()).map(|(w, mu)| w * mu).collect(),
            vmu: v.values().iter().zip(tree.masses()).map(|(w, mu)| w * mu).collect(),
            m: alloc::vec![0.0; leaves],
            sum: alloc::vec![0.0; max_atoms],
            stamp: alloc::vec![0; max_atoms],
            epoch: 0,
        })
    }
}

impl SetQuantity for SpEvaluator<'_> {
    fn evaluate(&mut self, b: &[usize]) -> Option<f64> {
        let mut s = 0.0;
        for &leaf in b {
            s += self.a[leaf];
            self.m[leaf] = 0.0;
        }
        if s == 0.0 {
            return None;
        }
        for n in 0..self.tree.num_levels() {
            self.epoch += 1;
            let leaf_atom = self.tree.leaf_atoms(n).expect("level in range");
            let atom_mass = self.tree.atom_masses(n).expect("level in range");
            for &leaf in b {
                let a = leaf_atom[leaf];
                if self.stamp[a] != self.epoch {
                    self.stamp[a] = self.epoch;
                    self.sum[a] = 0.0;
                }
                self.sum[a] += self.a[leaf];
            }
            for &leaf in b {
                let a = leaf_atom[leaf];
                let e = self.sum[a] / atom_mass[a];
                if e > self.m[leaf] {
                    self.m[leaf] = e;
                }
            }
        }
        let mut num = 0.0;
        for &leaf in b {
            num += self.m[leaf].powf(self.p) * self.vmu[leaf];
        }
        Some(num.powf(1.0 / self.p) / s.powf(1.0 / self.p))
    }
}

/// `RH(p1,p2)` constant of the pair `(ω1, ω2)`:
/// `sup_B (∫_B σ1)^{p/p1} (∫_B σ2)^{p/p2} / ∫_B σ1^{p/p1} σ2^{p/p2}`
/// with `σ_i = ω_i^{-1/(p_i-1)}`. Always at least 1 (Hölder), exactly 1
/// when `σ1 = σ2`.
pub fn rh_constant(
    tree: &FiltrationTree<f64>,
    w1: &Weight<f64>,
    w2: &Weight<f64>,
    exps: &ExponentConfig,
    mode: Mode,
) -> Result<ConditionConstant> {
    let s1 = dual_weight(w1, exps.p1())?;
    let s2 = dual_weight(w2, exps.p2())?;
    let mut eval = RhEvaluator::new(tree, &s1, &s2, exps)?;
    let (value, witness, exact) = sup_over_sets(tree, mode, &mut eval)?;
    Ok(ConditionConstant { value, witness: Witness::LeafSet(witness), exact })
}

/// `A_p⃗` constant of the triple `(v; ω1, ω2)`:
/// `max_{n, A ∈ P_n} E_n(v)^{1/p} E_n(σ1)^{1/p1'} E_n(σ2)^{1/p2'}` on `A`.
/// Exact for every tree size.
pub fn a_vec_p_constant(
    tree: &FiltrationTree<f64>,
    v: &Weight<f64>,
    w1: &Weight<f64>,
    w2: &Weight<f64>,
    exps: &ExponentConfig,
) -> Result<ConditionConstant> {
    let s1 = dual_weight(w1, exps.p1())?;
    let s2 = dual_weight(w2, exps.p2())?;
    let leaves = tree.leaf_count();
    for w in [v.len(), w1.len(), w2.len()] {
        if w != leaves {
            return Err(Error::LeafCountMismatch { expected: leaves, got: w });
        }
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for n in 0..tree.num_levels() {
        for (a, atom) in tree.atoms(n)?.iter().enumerate() {
            let mass = tree.atom_masses(n)?[a];
            let mut iv = 0.0;
            let mut i1 = 0.0;
            let mut i2 = 0.0;
            for &leaf in atom {
                let mu = tree.masses()[leaf];
                iv += v.values()[leaf] * mu;
                i1 += s1.values()[leaf] * mu;
                i2 += s2.values()[leaf] * mu;
            }
            let value = (iv / mass).powf(1.0 / exps.p())
                * (i1 / mass).powf(1.0 / exps.p1_prime())
                * (i2 / mass).powf(1.0 / exps.p2_prime());
            if best.is_none() || value > best.expect("set").0 {
                best = Some((value, n, a));
            }
        }
    }
    let (value, level, atom) = best.expect("tree has at least one atom");
    Ok(ConditionConstant {
        value,
        witness: Witness::LevelAtom { level, atom, leaves: tree.levels()[level][atom].clone() },
        exact: true,
    })
}

/// `S_p⃗` testing constant of the triple `(v; ω1, ω2)`; supremum of the
/// [`SvecEvaluator`] quantity over active sets.
pub fn s_vec_p_constant(
    tree: &FiltrationTree<f64>,
    v: &Weight<f64>,
    w1: &Weight<f64>,
    w2: &Weight<f64>,
    exps: &ExponentConfig,
    mode: Mode,
) -> Result<ConditionConstant> {
    let s1 = dual_weight(w1, exps.p1())?;
    let s2 = dual_weight(w2, exps.p2())?;
    let mut eval = SvecEvaluator::new(tree, v, &s1, &s2, exps)?;
    let (value, witness, exact) = sup_over_sets(tree, mode, &mut eval)?;
    Ok(ConditionConstant { value, witness: Witness::LeafSet(witness), exact })
}

/// Couple `A_p` constant: `max_{n, A} E_n(v) E_n(ω^{-1/(p-1)})^{p-1}`.
/// The one-weight condition is the case `v = ω`, where the constant is
/// at least 1 by conditional Jensen.
pub fn a_p_constant(
    tree: &FiltrationTree<f64>,
    v: &Weight<f64>,
    w: &Weight<f64>,
    p: f64,
) -> Result<ConditionConstant> {
    if p <= 1.0 || !p.is_finite() {
        return Err(Error::ExponentOutOfRange { value: p });
    }
    let sigma = dual_weight(w, p)?;
    let leaves = tree.leaf_count();
    for wl in [v.len(), w.len()] {
        if wl != leaves {
            return Err(Error::LeafCountMismatch { expected: leaves, got: wl });
        }
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for n in 0..tree.num_levels() {
        for (a, atom) in tree.atoms(n)?.iter().enumerate() {
            let mass = tree.atom_masses(n)?[a];
            let mut iv = 0.0;
            let mut is = 0.0;
            for &leaf in atom {
                let mu = tree.masses()[leaf];
                iv += v.values()[leaf] * mu;
                is += sigma.values()[leaf] * mu;
            }
            let value = (iv / mass) * (is / mass).powf(p - 1.0);
            if best.is_none() || value > best.expect("set").0 {
                best = Some((value, n, a));
            }
        }
    }
    let (value, level, atom) = best.expect("tree has at least one atom");
    Ok(ConditionConstant {
        value,
        witness: Witness::LevelAtom { level, atom, leaves: tree.levels()[level][atom].clone() },
        exact: true,
    })
}

/// Couple `S_p` testing constant:
/// `sup_B (∫_B M(σχ_B)^p v dμ)^{1/p} / |B|_σ^{1/p}` with `σ = ω^{-1/(p-1)}`.
pub fn s_p_constant(
    tree: &FiltrationTree<f64>,
    v: &Weight<f64>,
    w: &Weight<f64>,
    p: f64,
    mode: Mode,
) -> Result<ConditionConstant> {
    if p <= 1.0 || !p.is_finite() {
        return Err(Error::ExponentOutOfRange { value: p });
    }
    let sigma = dual_weight(w, p)?;
    let mut eval = SpEvaluator::new(tree, v, &sigma, p)?;
    let (value, witness, exact) = sup_over_sets(tree, mode, &mut eval)?;
    Ok(ConditionConstant { value, witness: Witness::LeafSet(witness), exact })
}
