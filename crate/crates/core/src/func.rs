//! Simple functions, weights, exponent bookkeeping, and weighted norms.
//!
//! A simple function is determined by one value per leaf of a
//! [`FiltrationTree`]; a weight is the strictly positive case. Norms are
//! computed over `f64` only, since they involve arbitrary real powers;
//! the purely field-arithmetic operations stay generic over [`Scalar`].

use alloc::vec::Vec;

// In no_std builds f64 math comes from this trait; test builds link std
// through dev-dependencies, whose inherent methods shadow it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tree::FiltrationTree;

/// Real-valued function constant on the leaves (finest atoms) of a tree.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleFunction<S: Scalar> {
    values: Vec<S>,
}

impl<S: Scalar> SimpleFunction<S> {
    pub fn new(values: Vec<S>) -> Self {
        SimpleFunction { values }
    }

    /// Constant function `c` on `leaf_count` leaves.
    pub fn constant(c: S, leaf_count: usize) -> Self {
        SimpleFunction { values: alloc::vec![c; leaf_count] }
    }

    /// Indicator of the leaf set `b`.
    pub fn indicator(b: &[usize], leaf_count: usize) -> Self {
        let mut values = alloc::vec![S::zero(); leaf_count];
        for &leaf in b {
            values[leaf] = S::one();
        }
        SimpleFunction { values }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abs(&self) -> Self {
        SimpleFunction { values: self.values.iter().map(|x| x.abs()).collect() }
    }

    pub fn pointwise_mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.clone() * b.clone())
            .collect();
        SimpleFunction { values }
    }

    pub fn pointwise_sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        SimpleFunction { values }
    }

    pub fn scale(&self, c: &S) -> Self {
        SimpleFunction { values: self.values.iter().map(|x| x.clone() * c.clone()).collect() }
    }

    /// `f · χ_B`: zero outside the leaf set `b`.
    pub fn restrict(&self, b: &[usize]) -> Self {
        let mut values = alloc::vec![S::zero(); self.values.len()];
        for &leaf in b {
            values[leaf] = self.values[leaf].clone();
        }
        SimpleFunction { values }
    }

    pub fn to_f64(&self) -> SimpleFunction<f64> {
        SimpleFunction {
            values: self.values.iter().map(|x| x.to_f64().expect("finite scalar")).collect(),
        }
    }
}

/// Strictly positive simple function; integrability is automatic on a
/// finite space.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight<S: Scalar> {
    values: Vec<S>,
}

impl<S: Scalar> Weight<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        for (leaf, x) in values.iter().enumerate() {
            // Signed::is_positive admits +0.0 in float mode, so compare
            // against zero directly; this also rejects NaN.
            if x.partial_cmp(&S::zero()) != Some(core::cmp::Ordering::Greater) {
                return Err(Error::NonPositiveWeight { leaf });
            }
        }
        Ok(Weight { values })
    }

    /// The constant weight 1.
    pub fn ones(leaf_count: usize) -> Self {
        Weight { values: alloc::vec![S::one(); leaf_count] }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_function(&self) -> SimpleFunction<S> {
        SimpleFunction::new(self.values.clone())
    }

    pub fn to_f64(&self) -> Weight<f64> {
        Weight {
            values: self.values.iter().map(|x| x.to_f64().expect("finite scalar")).collect(),
        }
    }
}

impl Weight<f64> {
    /// Pointwise power `w^e`; positivity is preserved for every real `e`.
    pub fn pow(&self, e: f64) -> Weight<f64> {
        Weight { values: self.values.iter().map(|x| x.powf(e)).collect() }
    }

    pub fn pointwise_mul(&self, other: &Weight<f64>) -> Weight<f64> {
        debug_assert_eq!(self.len(), other.len());
        Weight {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }
}

/// The dual weight `σ = ω^{-1/(p_i - 1)}`, so that `σ^{p_i} ω = σ`.
pub fn dual_weight(w: &Weight<f64>, p_i: f64) -> Result<Weight<f64>> {
    if p_i <= 1.0 || !p_i.is_finite() {
        return Err(Error::ExponentOutOfRange { value: p_i });
    }
    Ok(w.pow(-1.0 / (p_i - 1.0)))
}

/// Exponent pair `(p1, p2)` with the derived `p`, `p1'`, `p2'`.
///
/// `1/p = 1/p1 + 1/p2` holds by construction, so `p` can be below 1
/// (always above 1/2); norms in this crate accept that range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentConfig {
    p1: f64,
    p2: f64,
    p: f64,
    p1_prime: f64,
    p2_prime: f64,
}

impl ExponentConfig {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for v in [p1, p2] {
            if v <= 1.0 || !v.is_finite() {
                return Err(Error::ExponentOutOfRange { value: v });
            }
        }
        Ok(ExponentConfig {
            p1,
            p2,
            p: p1 * p2 / (p1 + p2),
            p1_prime: p1 / (p1 - 1.0),
            p2_prime: p2 / (p2 - 1.0),
        })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// The target exponent with `1/p = 1/p1 + 1/p2`; lies in `(1/2, ∞)`.
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p1_prime(&self) -> f64 {
        self.p1_prime
    }

    pub fn p2_prime(&self) -> f64 {
        self.p2_prime
    }
}

/// Constant of the quasi-triangle inequality in `L^p`: `max(2^{(1-p)/p}, 1)`.
/// Equals 1 for `p >= 1`.
pub fn quasi_triangle_constant(p: f64) -> f64 {
    let c = 2.0f64.powf((1.0 - p) / p);
    if c > 1.0 {
        c
    } else {
        1.0
    }
}

fn check_len(tree_leaves: usize, got: usize) -> Result<()> {
    if tree_leaves != got {
        return Err(Error::LeafCountMismatch { expected: tree_leaves, got });
    }
    Ok(())
}

/// `‖f‖_{L^p(w)} = (Σ_ℓ |f(ℓ)|^p w(ℓ) μ(ℓ))^{1/p}` for `p > 0`.
pub fn lp_norm(
    tree: &FiltrationTree<f64>,
    f: &SimpleFunction<f64>,
    p: f64,
    w: &Weight<f64>,
) -> Result<f64> {
    if p <= 0.0 || !p.is_finite() {
        return Err(Error::ExponentOutOfRange { value: p });
    }
    check_len(tree.leaf_count(), f.len())?;
    check_len(tree.leaf_count(), w.len())?;
    let mut sum = 0.0;
    for (leaf, x) in f.values().iter().enumerate() {
        if *x != 0.0 {
            sum += x.abs().powf(p) * w.values()[leaf] * tree.masses()[leaf];
        }
    }
    Ok(sum.powf(1.0 / p))
}

/// `‖f‖_{L^{p,∞}(v)} = sup_{λ>0} λ · |{|f| > λ}|_v^{1/p}`.
///
/// On a finite space the supremum is attained as λ increases to a value of
/// `|f|`, so it equals the exact maximum over the distinct values
/// `t = |f(ℓ)| > 0` of `t · |{|f| ≥ t}|_v^{1/p}`.
pub fn weak_lp_norm(
    tree: &FiltrationTree<f64>,
    f: &SimpleFunction<f64>,
    p: f64,
    v: &Weight<f64>,
) -> Result<f64> {
    if p <= 0.0 || !p.is_finite() {
        return Err(Error::ExponentOutOfRange { value: p });
    }
    check_len(tree.leaf_count(), f.len())?;
    check_len(tree.leaf_count(), v.len())?;
    let mut pairs: Vec<(f64, f64)> = f
        .values()
        .iter()
        .enumerate()
        .map(|(leaf, x)| (x.abs(), v.values()[leaf] * tree.masses()[leaf]))
        .collect();
    pairs.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    let mut mass = 0.0f64;
    let mut i = 0;
    while i < pairs.len() {
        let t = pairs[i].0;
        // fold the whole block of leaves sharing the value t into the
        // superlevel mass before scoring t
        while i < pairs.len() && pairs[i].0 == t {
            mass += pairs[i].1;
            i += 1;
        }
        if t > 0.0 {
            let cand = t * mass.powf(1.0 / p);
            if cand > best {
                best = cand;
            }
        }
    }
    Ok(best)
}

/// `Σ_{ℓ∈B} f(ℓ) w(ℓ) μ(ℓ)`; with `f ≡ 1` this is `|B|_w`.
pub fn restricted_integral<S: Scalar>(
    tree: &FiltrationTree<S>,
    f: &SimpleFunction<S>,
    b: &[usize],
    w: &Weight<S>,
) -> Result<S> {
    check_len(tree.leaf_count(), f.len())?;
    check_len(tree.leaf_count(), w.len())?;
    let mut sum = S::zero();
    for &leaf in b {
        if leaf >= tree.leaf_count() {
            return Err(Error::IndexOutOfRange { index: leaf, len: tree.leaf_count() });
        }
        sum = sum
            + f.values()[leaf].clone() * w.values()[leaf].clone() * tree.masses()[leaf].clone();
    }
    Ok(sum)
}
