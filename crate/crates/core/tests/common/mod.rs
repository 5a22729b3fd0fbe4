//! Fixtures and assertion helpers shared by the integration suites.
//!
//! The named fixtures pin small spaces whose constants are known in closed
//! form; every suite that freezes a derived value builds it from one of
//! these so the oracles stay in one place.

#![allow(dead_code)]

use marweight_core::{ExponentConfig, FiltrationTree, SimpleFunction, Weight};

/// Two uniform leaves, one refinement step.
pub fn unit2() -> FiltrationTree<f64> {
    FiltrationTree::build_dyadic(1, None).unwrap()
}

/// Four uniform leaves, the dyadic square.
pub fn dy4() -> FiltrationTree<f64> {
    FiltrationTree::build_dyadic(2, None).unwrap()
}

/// Twelve uniform leaves: root -> three blocks of four -> six pairs ->
/// singletons. Non-dyadic branching exercises the antichain recursion
/// (stopping-time count 1 + 26^3 = 17577).
pub fn mixed12() -> FiltrationTree<f64> {
    let masses = vec![1.0 / 12.0; 12];
    let levels = vec![
        vec![(0..12).collect::<Vec<usize>>()],
        vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![8, 9, 10, 11]],
        vec![
            vec![0, 1],
            vec![2, 3],
            vec![4, 5],
            vec![6, 7],
            vec![8, 9],
            vec![10, 11],
        ],
        (0..12).map(|i| vec![i]).collect(),
    ];
    FiltrationTree::new(masses, levels).unwrap()
}

/// The exponent couple (2, 2), so p = 1 and p1' = p2' = 2.
pub fn e22() -> ExponentConfig {
    ExponentConfig::new(2.0, 2.0).unwrap()
}

/// The weight (3/2, 1/2) on two uniform leaves. At p1 = p2 = 2 its dual is
/// (2/3, 2) and [A_p(2)] = [A_(2,2)] = 4/3, attained on the root atom.
pub fn fix_w() -> Weight<f64> {
    Weight::new(vec![1.5, 0.5]).unwrap()
}

/// The weight pair omega1 = (2/3, 2), omega2 = (2, 2/3) on two uniform
/// leaves. At (2, 2) the duals are (3/2, 1/2) and (1/2, 3/2), and
/// RH = 2/sqrt(3) with witness B = {0, 1}.
pub fn fix_rh() -> (Weight<f64>, Weight<f64>) {
    let w1 = Weight::new(vec![2.0 / 3.0, 2.0]).unwrap();
    let w2 = Weight::new(vec![2.0, 2.0 / 3.0]).unwrap();
    (w1, w2)
}

/// `RH(2,2)` of [`fix_rh`] in closed form: 2/sqrt(3).
pub const RH_FIXTURE_VALUE: f64 = 1.1547005383792517;

/// Assert `|actual - expected| <= tol * max(|expected|, 1)`.
pub fn assert_close(actual: f64, expected: f64, tol: f64) {
    let scale = expected.abs().max(1.0);
    assert!(
        (actual - expected).abs() <= tol * scale,
        "expected {expected}, got {actual} (tol {tol}, diff {})",
        (actual - expected).abs()
    );
}

/// Assert two slices agree entrywise within `tol` (relative to each entry).
pub fn assert_values_close(actual: &[f64], expected: &[f64], tol: f64) {
    assert_eq!(actual.len(), expected.len(), "length mismatch");
    for (i, (a, e)) in actual.iter().zip(expected).enumerate() {
        let scale = e.abs().max(1.0);
        assert!(
            (a - e).abs() <= tol * scale,
            "entry {i}: expected {e}, got {a} (tol {tol})"
        );
    }
}

/// Constant function 1 on `n` leaves.
pub fn ones_fn(n: usize) -> SimpleFunction<f64> {
    SimpleFunction::constant(1.0, n)
}
