//! Doob, bisublinear, and multisublinear maximal operators, plus their
//! weighted-measure variants.
//!
//! Every supremum over levels is an exact maximum over `0..=N`. Products
//! of conditional expectations are formed level by level and then
//! maximized; `𝓜(f,g)` is **not** `Mf · Mg` in general, only dominated
//! by it.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::func::{SimpleFunction, Weight};
use crate::scalar::{max_scalar, Scalar};
use crate::tree::FiltrationTree;

/// `Mf = max_n |E_n f|` pointwise.
pub fn doob_maximal<S: Scalar>(
    tree: &FiltrationTree<S>,
    f: &SimpleFunction<S>,
) -> Result<SimpleFunction<S>> {
    multisublinear_maximal(tree, core::slice::from_ref(f))
}

/// `𝓜(f,g) = max_n |E_n f| |E_n g|` pointwise.
pub fn bisublinear_maximal<S: Scalar>(
    tree: &FiltrationTree<S>,
    f: &SimpleFunction<S>,
    g: &SimpleFunction<S>,
) -> Result<SimpleFunction<S>> {
    multisublinear_maximal(tree, &[f.clone(), g.clone()])
}

/// `𝓜(f_1,…,f_m) = max_n Π_i |E_n f_i|` pointwise.
pub fn multisublinear_maximal<S: Scalar>(
    tree: &FiltrationTree<S>,
    fs: &[SimpleFunction<S>],
) -> Result<SimpleFunction<S>> {
    if fs.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut best: Option<Vec<S>> = None;
    for n in 0..tree.num_levels() {
        let mut level = alloc::vec![S::one(); tree.leaf_count()];
        for f in fs {
            let en = tree.conditional_expectation(f, n)?;
            for (x, e) in level.iter_mut().zip(en.values()) {
                *x = x.clone() * e.abs();
            }
        }
        best = Some(match best {
            None => level,
            Some(acc) => acc
                .into_iter()
                .zip(level)
                .map(|(a, b)| max_scalar(a, b))
                .collect(),
        });
    }
    Ok(SimpleFunction::new(best.expect("at least one level")))
}

/// `M^v f = max_n |E_n^v f|` pointwise.
pub fn weighted_maximal<S: Scalar>(
    tree: &FiltrationTree<S>,
    f: &SimpleFunction<S>,
    v: &Weight<S>,
) -> Result<SimpleFunction<S>> {
    let mut best: Option<Vec<S>> = None;
    for n in 0..tree.num_levels() {
        let en = tree.weighted_conditional_expectation(f, v, n)?;
        let level: Vec<S> = en.values().iter().map(|e| e.abs()).collect();
        best = Some(match best {
            None => level,
            Some(acc) => acc
                .into_iter()
                .zip(level)
                .map(|(a, b)| max_scalar(a, b))
                .collect(),
        });
    }
    Ok(SimpleFunction::new(best.expect("at least one level")))
}

/// `𝓜^{σ1,σ2}(f,g) = max_n |E_n^{σ1} f| |E_n^{σ2} g|` pointwise.
pub fn weighted_bisublinear_maximal<S: Scalar>(
    tree: &FiltrationTree<S>,
    f: &SimpleFunction<S>,
    g: &SimpleFunction<S>,
    s1: &Weight<S>,
    s2: &Weight<S>,
) -> Result<SimpleFunction<S>> {
    let mut best: Option<Vec<S>> = None;
    for n in 0..tree.num_levels() {
        let ef = tree.weighted_conditional_expectation(f, s1, n)?;
        let eg = tree.weighted_conditional_expectation(g, s2, n)?;
        let level: Vec<S> = ef
            .values()
            .iter()
            .zip(eg.values())
            .map(|(a, b)| a.abs() * b.abs())
            .collect();
        best = Some(match best {
            None => level,
            Some(acc) => acc
                .into_iter()
                .zip(level)
                .map(|(a, b)| max_scalar(a, b))
                .collect(),
        });
    }
    Ok(SimpleFunction::new(best.expect("at least one level")))
}
