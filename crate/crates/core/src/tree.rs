//! Finite filtered probability spaces as refinement trees.
//!
//! A space is a finite leaf set with strictly positive masses summing to 1
//! together with a sequence of partitions `P_0, …, P_N` of the leaves, each
//! refining the previous one and the last consisting of singletons. Level
//! `n` plays the role of the σ-field `F_n`; functions measurable with
//! respect to it are exactly those constant on the atoms of `P_n`.
//! Conditional expectation is the atom-wise mass-weighted average, computed
//! exactly in rational mode.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::func::{SimpleFunction, Weight};
use crate::scalar::Scalar;

/// Position of one atom: a level `n` and the atom's index within `P_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AtomRef {
    pub level: usize,
    pub index: usize,
}

/// One violated invariant found by [`validate_parts`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoLevels,
    NoLeaves,
    NonPositiveMass { leaf: usize },
    MassSumNotOne,
    BadLeafIndex { level: usize, atom: usize, index: usize },
    EmptyAtom { level: usize, atom: usize },
    DuplicateLeaf { level: usize, leaf: usize },
    MissingLeaf { level: usize, leaf: usize },
    NotRefining { level: usize, atom: usize },
    FinalLevelNotSingletons,
}

/// Outcome of structural validation; empty iff the parts form a valid tree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check raw masses and partitions against every tree invariant: positive
/// masses summing to 1, each level a partition of the leaf set, levels
/// refining, final level singletons. Reports all violations instead of
/// stopping at the first.
pub fn validate_parts<S: Scalar>(masses: &[S], levels: &[Vec<Vec<usize>>]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let leaf_count = masses.len();

    if leaf_count == 0 {
        report.violations.push(Violation::NoLeaves);
    }
    for (leaf, m) in masses.iter().enumerate() {
        // Signed::is_positive admits +0.0 in float mode, so compare
        // against zero directly; this also rejects NaN.
        if m.partial_cmp(&S::zero()) != Some(core::cmp::Ordering::Greater) {
            report.violations.push(Violation::NonPositiveMass { leaf });
        }
    }
    if leaf_count > 0 {
        let mut sum = S::zero();
        for m in masses {
            sum = sum + m.clone();
        }
        let off = (sum - S::one()).abs();
        let bad = if S::EXACT {
            !off.is_zero()
        } else {
            off > S::from_f64(MASS_SUM_TOL).expect("tolerance representable")
        };
        if bad {
            report.violations.push(Violation::MassSumNotOne);
        }
    }

    if levels.is_empty() {
        report.violations.push(Violation::NoLevels);
        return report;
    }

    // leaf -> atom maps for the levels that are genuine partitions; the
    // refinement check only runs between consecutive valid ones
    let mut leaf_atom: Vec<Option<Vec<usize>>> = Vec::with_capacity(levels.len());
    for (n, atoms) in levels.iter().enumerate() {
        let mut map = alloc::vec![usize::MAX; leaf_count];
        let mut ok = true;
        for (a, atom) in atoms.iter().enumerate() {
            if atom.is_empty() {
                report.violations.push(Violation::EmptyAtom { level: n, atom: a });
                ok = false;
            }
            for &leaf in atom {
                if leaf >= leaf_count {
                    report.violations.push(Violation::BadLeafIndex { level: n, atom: a, index: leaf });
                    ok = false;
                } else if map[leaf] != usize::MAX {
                    report.violations.push(Violation::DuplicateLeaf { level: n, leaf });
                    ok = false;
                } else {
                    map[leaf] = a;
                }
            }
        }
        for (leaf, a) in map.iter().enumerate() {
            if *a == usize::MAX {
                report.violations.push(Violation::MissingLeaf { level: n, leaf });
                ok = false;
            }
        }
        leaf_atom.push(if ok { Some(map) } else { None });
    }

    for n in 1..levels.len() {
        let (Some(prev), Some(_)) = (&leaf_atom[n - 1], &leaf_atom[n]) else { continue };
        for (a, atom) in levels[n].iter().enumerate() {
            let parent = prev[atom[0]];
            if atom.iter().any(|&leaf| prev[leaf] != parent) {
                report.violations.push(Violation::NotRefining { level: n, atom: a });
            }
        }
    }

    if let Some(last) = levels.last() {
        if last.iter().any(|atom| atom.len() != 1) {
            report.violations.push(Violation::FinalLevelNotSingletons);
        }
    }

    report
}

/// Float-mode tolerance for the mass-sum-equals-one check.
pub const MASS_SUM_TOL: f64 = 1e-9;

/// Finite filtered probability space `(Ω, F, μ; (F_n)_{n=0}^N)`.
///
/// Immutable after construction; every method is pure.
#[derive(Clone, Debug, PartialEq)]
pub struct FiltrationTree<S: Scalar> {
    masses: Vec<S>,
    levels: Vec<Vec<Vec<usize>>>,
    leaf_atom: Vec<Vec<usize>>,
    atom_mass: Vec<Vec<S>>,
}

impl<S: Scalar> FiltrationTree<S> {
    /// Build and fully validate a tree from leaf masses and partitions
    /// (coarsest first, `P_0` not necessarily trivial).
    pub fn new(masses: Vec<S>, mut levels: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let report = validate_parts(&masses, &levels);
        if let Some(v) = report.violations.first() {
            return Err(match v {
                Violation::NonPositiveMass { leaf } => Error::NonPositiveMass { leaf: *leaf },
                Violation::MassSumNotOne => Error::MassSumNotOne,
                other => Error::InvalidTree(format!("{other:?}")),
            });
        }
        for atoms in &mut levels {
            for atom in atoms.iter_mut() {
                atom.sort_unstable();
            }
        }
        let leaf_count = masses.len();
        let mut leaf_atom = Vec::with_capacity(levels.len());
        let mut atom_mass = Vec::with_capacity(levels.len());
        for atoms in &levels {
            let mut map = alloc::vec![0usize; leaf_count];
            let mut am = Vec::with_capacity(atoms.len());
            for (a, atom) in atoms.iter().enumerate() {
                let mut m = S::zero();
                for &leaf in atom {
                    map[leaf] = a;
                    m = m + masses[leaf].clone();
                }
                am.push(m);
            }
            leaf_atom.push(map);
            atom_mass.push(am);
        }
        Ok(FiltrationTree { masses, levels, leaf_atom, atom_mass })
    }

    /// Dyadic tree of the given depth: `2^depth` leaves, `P_n` the blocks
    /// of `2^{depth-n}` consecutive leaves. Masses uniform when omitted.
    pub fn build_dyadic(depth: usize, masses: Option<Vec<S>>) -> Result<Self> {
        if depth > 24 {
            return Err(Error::BadSpec(format!("dyadic depth {depth} too large")));
        }
        let leaf_count = 1usize << depth;
        let masses = match masses {
            Some(m) => {
                if m.len() != leaf_count {
                    return Err(Error::BadLength { expected: leaf_count, got: m.len() });
                }
                m
            }
            None => alloc::vec![S::from_ratio(1, leaf_count as i64); leaf_count],
        };
        let mut levels = Vec::with_capacity(depth + 1);
        for n in 0..=depth {
            let block = 1usize << (depth - n);
            let atoms = (0..(1usize << n))
                .map(|a| (a * block..(a + 1) * block).collect())
                .collect();
            levels.push(atoms);
        }
        FiltrationTree::new(masses, levels)
    }

    /// Re-check this tree's invariants; empty by construction.
    pub fn validate(&self) -> ValidationReport {
        validate_parts(&self.masses, &self.levels)
    }

    pub fn leaf_count(&self) -> usize {
        self.masses.len()
    }

    /// Number of levels, `N + 1`.
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// The finest level index `N`.
    pub fn last_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn masses(&self) -> &[S] {
        &self.masses
    }

    pub fn levels(&self) -> &[Vec<Vec<usize>>] {
        &self.levels
    }

    /// Atoms of `P_n`.
    pub fn atoms(&self, n: usize) -> Result<&[Vec<usize>]> {
        self.levels
            .get(n)
            .map(|v| v.as_slice())
            .ok_or(Error::LevelOutOfRange { level: n, max: self.last_level() })
    }

    /// Leaves of one atom.
    pub fn atom(&self, at: AtomRef) -> Result<&[usize]> {
        let atoms = self.atoms(at.level)?;
        atoms
            .get(at.index)
            .map(|v| v.as_slice())
            .ok_or(Error::IndexOutOfRange { index: at.index, len: atoms.len() })
    }

    /// `μ(A)` for an atom of `P_n`.
    pub fn atom_mass(&self, at: AtomRef) -> Result<S> {
        self.atom(at)?;
        Ok(self.atom_mass[at.level][at.index].clone())
    }

    /// The whole leaf-to-atom map of one level.
    pub fn leaf_atoms(&self, n: usize) -> Result<&[usize]> {
        self.leaf_atom
            .get(n)
            .map(|v| v.as_slice())
            .ok_or(Error::LevelOutOfRange { level: n, max: self.last_level() })
    }

    /// All atom masses of one level, indexed like `atoms(n)`.
    pub fn atom_masses(&self, n: usize) -> Result<&[S]> {
        self.atom_mass
            .get(n)
            .map(|v| v.as_slice())
            .ok_or(Error::LevelOutOfRange { level: n, max: self.last_level() })
    }

    /// Index within `P_n` of the atom containing a leaf.
    pub fn atom_of_leaf(&self, n: usize, leaf: usize) -> Result<usize> {
        if n >= self.levels.len() {
            return Err(Error::LevelOutOfRange { level: n, max: self.last_level() });
        }
        if leaf >= self.leaf_count() {
            return Err(Error::IndexOutOfRange { index: leaf, len: self.leaf_count() });
        }
        Ok(self.leaf_atom[n][leaf])
    }

    /// `μ(B)` for an arbitrary leaf set.
    pub fn mass_of_set(&self, b: &[usize]) -> Result<S> {
        let mut sum = S::zero();
        for &leaf in b {
            if leaf >= self.leaf_count() {
                return Err(Error::IndexOutOfRange { index: leaf, len: self.leaf_count() });
            }
            sum = sum + self.masses[leaf].clone();
        }
        Ok(sum)
    }

    fn check_fn_len(&self, len: usize) -> Result<()> {
        if len != self.leaf_count() {
            return Err(Error::LeafCountMismatch { expected: self.leaf_count(), got: len });
        }
        Ok(())
    }

    /// `E_n f`: on each atom `A` of `P_n`, the average `∫_A f dμ / μ(A)`.
    /// Constant on the atoms of `P_n`; the identity at `n = N`.
    pub fn conditional_expectation(
        &self,
        f: &SimpleFunction<S>,
        n: usize,
    ) -> Result<SimpleFunction<S>> {
        self.check_fn_len(f.len())?;
        let atoms = self.atoms(n)?;
        let mut out = alloc::vec![S::zero(); self.leaf_count()];
        for (a, atom) in atoms.iter().enumerate() {
            if atom.len() == 1 {
                // exact identity on singleton atoms, bit-for-bit in float mode
                out[atom[0]] = f.values()[atom[0]].clone();
                continue;
            }
            let mut num = S::zero();
            for &leaf in atom {
                num = num + f.values()[leaf].clone() * self.masses[leaf].clone();
            }
            let avg = num / self.atom_mass[n][a].clone();
            for &leaf in atom {
                out[leaf] = avg.clone();
            }
        }
        Ok(SimpleFunction::new(out))
    }

    /// `E_n^v f = E_n(f v) / E_n(v)`: conditional expectation relative to
    /// the probability measure proportional to `v dμ`.
    pub fn weighted_conditional_expectation(
        &self,
        f: &SimpleFunction<S>,
        v: &Weight<S>,
        n: usize,
    ) -> Result<SimpleFunction<S>> {
        self.check_fn_len(f.len())?;
        self.check_fn_len(v.len())?;
        let atoms = self.atoms(n)?;
        let mut out = alloc::vec![S::zero(); self.leaf_count()];
        for atom in atoms {
            if atom.len() == 1 {
                out[atom[0]] = f.values()[atom[0]].clone();
                continue;
            }
            let mut num = S::zero();
            let mut den = S::zero();
            for &leaf in atom {
                let vm = v.values()[leaf].clone() * self.masses[leaf].clone();
                num = num + f.values()[leaf].clone() * vm.clone();
                den = den + vm;
            }
            let avg = num / den;
            for &leaf in atom {
                out[leaf] = avg.clone();
            }
        }
        Ok(SimpleFunction::new(out))
    }

    /// The whole martingale `(E_0 f, …, E_N f)`.
    pub fn martingale(&self, f: &SimpleFunction<S>) -> Result<Vec<SimpleFunction<S>>> {
        (0..self.num_levels()).map(|n| self.conditional_expectation(f, n)).collect()
    }

    /// `(E_0^v f, …, E_N^v f)`.
    pub fn weighted_martingale(
        &self,
        f: &SimpleFunction<S>,
        v: &Weight<S>,
    ) -> Result<Vec<SimpleFunction<S>>> {
        (0..self.num_levels())
            .map(|n| self.weighted_conditional_expectation(f, v, n))
            .collect()
    }

    /// Convert masses to `f64`, keeping the partition structure.
    pub fn to_f64(&self) -> FiltrationTree<f64> {
        FiltrationTree::new(
            self.masses.iter().map(|m| m.to_f64().expect("finite mass")).collect(),
            self.levels.clone(),
        )
        .expect("valid by construction")
    }
}
