//! Stopping times on the filtration tree.
//!
//! A stopping time is a leaf assignment `τ: leaves → {0,…,N} ∪ {∞}` such
//! that `{τ ≤ n}` is a union of atoms of `P_n` for every `n`; equivalently
//! the set of tree nodes on which τ stops forms an antichain. Exhaustive
//! enumeration follows the node recursion `S(node) = 1 + Π_children
//! S(child)` (childless nodes count 2: stop there or never), so the family
//! over a forest is the product over the roots.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::func::SimpleFunction;
use crate::scalar::Scalar;
use crate::tree::FiltrationTree;

/// Leaf-to-level assignment; `None` encodes `τ = ∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoppingTime {
    assignment: Vec<Option<usize>>,
}

/// Outcome of the measurability check: offending `(level, atom)` pairs are
/// atoms split by `{τ ≤ level}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeasurabilityReport {
    pub violations: Vec<(usize, usize)>,
}

impl MeasurabilityReport {
    pub fn is_stopping_time(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check whether an assignment is measurable: for every level `n` and atom
/// `A` of `P_n`, the predicate `τ ≤ n` must be constant on `A`. Errors only
/// on malformed input (wrong length, level beyond `N`).
pub fn is_stopping_time<S: Scalar>(
    tree: &FiltrationTree<S>,
    assignment: &[Option<usize>],
) -> Result<MeasurabilityReport> {
    if assignment.len() != tree.leaf_count() {
        return Err(Error::LeafCountMismatch {
            expected: tree.leaf_count(),
            got: assignment.len(),
        });
    }
    let max = tree.last_level();
    for value in assignment.iter().flatten() {
        if *value > max {
            return Err(Error::LevelOutOfRange { level: *value, max });
        }
    }
    let mut report = MeasurabilityReport::default();
    for n in 0..tree.num_levels() {
        for (a, atom) in tree.atoms(n)?.iter().enumerate() {
            let stopped = |leaf: usize| assignment[leaf].is_some_and(|t| t <= n);
            let first = stopped(atom[0]);
            if atom.iter().any(|&leaf| stopped(leaf) != first) {
                report.violations.push((n, a));
            }
        }
    }
    Ok(report)
}

impl StoppingTime {
    /// Validate an assignment against the tree and wrap it.
    pub fn new<S: Scalar>(
        tree: &FiltrationTree<S>,
        assignment: Vec<Option<usize>>,
    ) -> Result<Self> {
        let report = is_stopping_time(tree, &assignment)?;
        if let Some(&(level, atom)) = report.violations.first() {
            return Err(Error::InvalidStoppingTime { level, atom });
        }
        Ok(StoppingTime { assignment })
    }

    /// `τ ≡ n`; valid on any tree with `n ≤ N`.
    pub fn constant<S: Scalar>(tree: &FiltrationTree<S>, n: usize) -> Result<Self> {
        if n > tree.last_level() {
            return Err(Error::LevelOutOfRange { level: n, max: tree.last_level() });
        }
        Ok(StoppingTime { assignment: alloc::vec![Some(n); tree.leaf_count()] })
    }

    /// `τ ≡ ∞`.
    pub fn never(leaf_count: usize) -> Self {
        StoppingTime { assignment: alloc::vec![None; leaf_count] }
    }

    pub(crate) fn from_raw(assignment: Vec<Option<usize>>) -> Self {
        StoppingTime { assignment }
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    pub fn value(&self, leaf: usize) -> Option<usize> {
        self.assignment[leaf]
    }

    /// Sorted leaf list of the active set `{τ < ∞}`.
    pub fn finite_set(&self) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&l| self.assignment[l].is_some()).collect()
    }
}

/// First entry time: `τ(ℓ) = inf{n : conditions[n](ℓ)}`, `∞` if none holds.
///
/// `conditions` has one boolean vector per level; each must be constant on
/// the atoms of its level (adaptedness), which makes the result a stopping
/// time by construction.
pub fn hitting_time<S: Scalar>(
    tree: &FiltrationTree<S>,
    conditions: &[Vec<bool>],
) -> Result<StoppingTime> {
    if conditions.len() != tree.num_levels() {
        return Err(Error::BadLength { expected: tree.num_levels(), got: conditions.len() });
    }
    for (n, cond) in conditions.iter().enumerate() {
        if cond.len() != tree.leaf_count() {
            return Err(Error::LeafCountMismatch {
                expected: tree.leaf_count(),
                got: cond.len(),
            });
        }
        for (a, atom) in tree.atoms(n)?.iter().enumerate() {
            let first = cond[atom[0]];
            if atom.iter().any(|&leaf| cond[leaf] != first) {
                return Err(Error::NotAdapted { level: n, atom: a });
            }
        }
    }
    let assignment = (0..tree.leaf_count())
        .map(|leaf| (0..conditions.len()).find(|&n| conditions[n][leaf]))
        .collect();
    Ok(StoppingTime { assignment })
}

/// `τ = N` on `B`, `∞` elsewhere; always a stopping time since `P_N` is
/// made of singletons. Realizes every `F_N`-measurable set as `{τ < ∞}`.
pub fn from_set<S: Scalar>(tree: &FiltrationTree<S>, b: &[usize]) -> Result<StoppingTime> {
    let mut assignment = alloc::vec![None; tree.leaf_count()];
    for &leaf in b {
        if leaf >= tree.leaf_count() {
            return Err(Error::IndexOutOfRange { index: leaf, len: tree.leaf_count() });
        }
        assignment[leaf] = Some(tree.last_level());
    }
    Ok(StoppingTime { assignment })
}

/// `f_τ` on `{τ < ∞}`: at a leaf with `τ = n`, the value `(E_n f)(ℓ)`;
/// `None` where `τ = ∞`.
pub fn stopped_value<S: Scalar>(
    tree: &FiltrationTree<S>,
    f: &SimpleFunction<S>,
    tau: &StoppingTime,
) -> Result<Vec<Option<S>>> {
    if tau.assignment.len() != tree.leaf_count() {
        return Err(Error::LeafCountMismatch {
            expected: tree.leaf_count(),
            got: tau.assignment.len(),
        });
    }
    let mut used = alloc::vec![false; tree.num_levels()];
    for value in tau.assignment.iter().flatten() {
        if *value > tree.last_level() {
            return Err(Error::LevelOutOfRange { level: *value, max: tree.last_level() });
        }
        used[*value] = true;
    }
    let mut per_level: Vec<Option<SimpleFunction<S>>> = alloc::vec![None; tree.num_levels()];
    for (n, flag) in used.iter().enumerate() {
        if *flag {
            per_level[n] = Some(tree.conditional_expectation(f, n)?);
        }
    }
    Ok(tau
        .assignment
        .iter()
        .enumerate()
        .map(|(leaf, t)| {
            t.map(|n| per_level[n].as_ref().expect("computed").values()[leaf].clone())
        })
        .collect())
}

/// `E(f | F_τ)` on `{τ < ∞}`. On a finite tree this coincides with
/// [`stopped_value`] leaf by leaf; the alias keeps proof code readable.
pub fn stopped_conditional_expectation<S: Scalar>(
    tree: &FiltrationTree<S>,
    f: &SimpleFunction<S>,
    tau: &StoppingTime,
) -> Result<Vec<Option<S>>> {
    stopped_value(tree, f, tau)
}

/// `E^w(f | F_τ)` on `{τ < ∞}`: at a leaf with `τ = n`, the value
/// `(E_n^w f)(ℓ)`; `None` where `τ = ∞`.
pub fn stopped_weighted_value<S: Scalar>(
    tree: &FiltrationTree<S>,
    f: &SimpleFunction<S>,
    w: &crate::func::Weight<S>,
    tau: &StoppingTime,
) -> Result<Vec<Option<S>>> {
    if tau.assignment.len() != tree.leaf_count() {
        return Err(Error::LeafCountMismatch {
            expected: tree.leaf_count(),
            got: tau.assignment.len(),
        });
    }
    let mut used = alloc::vec![false; tree.num_levels()];
    for value in tau.assignment.iter().flatten() {
        if *value > tree.last_level() {
            return Err(Error::LevelOutOfRange { level: *value, max: tree.last_level() });
        }
        used[*value] = true;
    }
    let mut per_level: Vec<Option<SimpleFunction<S>>> = alloc::vec![None; tree.num_levels()];
    for (n, flag) in used.iter().enumerate() {
        if *flag {
            per_level[n] = Some(tree.weighted_conditional_expectation(f, w, n)?);
        }
    }
    Ok(tau
        .assignment
        .iter()
        .enumerate()
        .map(|(leaf, t)| {
            t.map(|n| per_level[n].as_ref().expect("computed").values()[leaf].clone())
        })
        .collect())
}

fn children_map<S: Scalar>(tree: &FiltrationTree<S>) -> Vec<Vec<Vec<usize>>> {
    let mut children: Vec<Vec<Vec<usize>>> = Vec::with_capacity(tree.num_levels());
    for n in 0..tree.num_levels() {
        children.push(alloc::vec![Vec::new(); tree.levels()[n].len()]);
    }
    for n in 1..tree.num_levels() {
        for (a, atom) in tree.levels()[n].iter().enumerate() {
            let parent = tree.atom_of_leaf(n - 1, atom[0]).expect("valid atom");
            children[n - 1][parent].push(a);
        }
    }
    children
}

fn count_node(
    children: &[Vec<Vec<usize>>],
    n: usize,
    a: usize,
) -> u128 {
    let mut product: u128 = 1;
    if n + 1 < children.len() {
        for &c in &children[n][a] {
            product = product.saturating_mul(count_node(children, n + 1, c));
        }
    }
    product.saturating_add(1)
}

/// Number of stopping times, by the antichain recursion. Saturates at
/// `u128::MAX` rather than overflowing.
pub fn count_stopping_times<S: Scalar>(tree: &FiltrationTree<S>) -> u128 {
    let children = children_map(tree);
    let mut total: u128 = 1;
    for a in 0..tree.levels()[0].len() {
        total = total.saturating_mul(count_node(&children, 0, a));
    }
    total
}

struct EnumCtx<'t, S: Scalar> {
    tree: &'t FiltrationTree<S>,
    children: Vec<Vec<Vec<usize>>>,
}

fn visit_forest<S: Scalar>(
    ctx: &EnumCtx<'_, S>,
    nodes: &[(usize, usize)],
    i: usize,
    buf: &mut Vec<Option<usize>>,
    emit: &mut dyn FnMut(&[Option<usize>]),
) {
    if i == nodes.len() {
        emit(buf);
        return;
    }
    let (n, a) = nodes[i];
    let atom = &ctx.tree.levels()[n][a];
    for &leaf in atom {
        buf[leaf] = Some(n);
    }
    visit_forest(ctx, nodes, i + 1, buf, emit);
    if n == ctx.tree.last_level() {
        for &leaf in atom {
            buf[leaf] = None;
        }
        visit_forest(ctx, nodes, i + 1, buf, emit);
    } else {
        let rest: Vec<(usize, usize)> = ctx.children[n][a]
            .iter()
            .map(|&c| (n + 1, c))
            .chain(nodes[i + 1..].iter().copied())
            .collect();
        visit_forest(ctx, &rest, 0, buf, emit);
    }
}

/// Stream every stopping time in a fixed deterministic order ("stop here"
/// before descending, children in ascending order), without materializing
/// the family. Refuses when the count exceeds `cap`.
pub fn for_each_stopping_time<S: Scalar>(
    tree: &FiltrationTree<S>,
    cap: u128,
    mut f: impl FnMut(&[Option<usize>]),
) -> Result<()> {
    let count = count_stopping_times(tree);
    if count > cap {
        return Err(Error::TooManyStoppingTimes { count, cap });
    }
    let ctx = EnumCtx { tree, children: children_map(tree) };
    let roots: Vec<(usize, usize)> = (0..tree.levels()[0].len()).map(|a| (0, a)).collect();
    let mut buf = alloc::vec![None; tree.leaf_count()];
    visit_forest(&ctx, &roots, 0, &mut buf, &mut f);
    Ok(())
}

/// Default cap for [`enumerate_stopping_times`].
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// All stopping times of the tree, in the deterministic streaming order.
pub fn enumerate_stopping_times<S: Scalar>(
    tree: &FiltrationTree<S>,
    cap: u128,
) -> Result<Vec<StoppingTime>> {
    let mut out = Vec::new();
    for_each_stopping_time(tree, cap, |assignment| {
        out.push(StoppingTime::from_raw(assignment.to_vec()));
    })?;
    Ok(out)
}
