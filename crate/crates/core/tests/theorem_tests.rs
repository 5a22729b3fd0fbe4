//! End-to-end verification suites: the weak-type equivalence chain, the
//! Sawyer decomposition and strong bound, pointwise domination, the
//! one-weight suite, and martingale convergence.

mod common;

use common::{assert_close, dy4, e22, fix_rh, fix_w, ones_fn, unit2};
use marweight_core::sample::{lognormal_weight, rng_for, signed_function};
use marweight_core::stopping::StoppingTime;
use marweight_core::theorem::{
    bilinear_en_ratio, construct_tail_dominator, convergence_defect, dyadic_shell,
    le_with_tol, one_weight_suite, pointwise_domination_check, pow2, sawyer_decomposition,
    stopped_bilinear_ratio, verify_sawyer, verify_strong_chain, verify_weak_equivalences,
    weak_bilinear_ratio, weak_holder_constant, weak_holder_suite,
};
use marweight_core::{dual_weight, Error, ExponentConfig, SimpleFunction, Weight};

#[test]
fn dyadic_shell_pins_the_half_open_interval() {
    // 2^k < x <= 2^{k+1}
    assert_eq!(dyadic_shell(1.0), -1);
    assert_eq!(dyadic_shell(2.0), 0);
    assert_eq!(dyadic_shell(2.0 + 1e-12), 1);
    assert_eq!(dyadic_shell(3.0), 1);
    assert_eq!(dyadic_shell(4.0), 1);
    assert_eq!(dyadic_shell(0.75), -1);
    assert_eq!(dyadic_shell(0.5), -2);
    for k in -40..40 {
        assert_eq!(dyadic_shell(pow2(k)), k - 1, "at 2^{k}");
        assert_eq!(dyadic_shell(1.0000001 * pow2(k)), k, "just above 2^{k}");
    }
}

#[test]
fn le_with_tol_boundaries() {
    assert!(le_with_tol(1.0, 1.0));
    assert!(le_with_tol(1.0 + 5e-10, 1.0));
    assert!(!le_with_tol(1.0 + 3e-9, 1.0));
    assert!(le_with_tol(1e-13, 0.0));
    assert!(!le_with_tol(1e-11, 0.0));
    assert!(le_with_tol(-5.0, -4.0));
}

/// Stopped ratio of the spike pair at tau = 0 on unit weights:
/// numerator integrates E_0 f * E_0 f = 1, denominator is 2 * 2.
#[test]
fn stopped_ratio_spike() {
    let t = dy4();
    let ones = Weight::ones(4);
    let f = SimpleFunction::new(vec![4.0, 0.0, 0.0, 0.0]);
    let tau0 = StoppingTime::constant(&t, 0).unwrap();
    let r = stopped_bilinear_ratio(&t, &ones, &ones, &ones, &e22(), &f, &f, &tau0).unwrap();
    assert_close(r, 0.25, 1e-12);
}

#[test]
fn stopped_ratio_rejects_zero_norms() {
    let t = dy4();
    let ones = Weight::ones(4);
    let zero = SimpleFunction::constant(0.0, 4);
    let tau0 = StoppingTime::constant(&t, 0).unwrap();
    assert_eq!(
        stopped_bilinear_ratio(&t, &ones, &ones, &ones, &e22(), &zero, &zero, &tau0)
            .unwrap_err(),
        Error::ZeroDenominator
    );
}

/// On the coupled fixture, testing with f = g = sigma at level 0 attains
/// the A_vec constant 4/3 exactly.
#[test]
fn bilinear_en_ratio_attains_a_vec() {
    let t = unit2();
    let w = fix_w();
    let s = dual_weight(&w, 2.0).unwrap().as_function();
    let r = bilinear_en_ratio(&t, &w, &e22(), &w, &w, 0, &s, &s).unwrap();
    assert_close(r, 4.0 / 3.0, 1e-12);
}

/// With everything equal to 1 each E_n ratio is exactly 1.
#[test]
fn bilinear_en_ratio_unit() {
    let t = dy4();
    let ones = Weight::ones(4);
    for n in 0..3 {
        let r = bilinear_en_ratio(&t, &ones, &e22(), &ones, &ones, n, &ones_fn(4), &ones_fn(4))
            .unwrap();
        assert_close(r, 1.0, 1e-12);
    }
}

#[test]
fn weak_holder_constant_values() {
    assert_close(weak_holder_constant(2.0, 2.0), 2.0, 1e-12);
    assert_close(
        weak_holder_constant(2.0, 4.0),
        1.5f64.sqrt() * 3.0f64.powf(0.25),
        1e-12,
    );
    // symmetric in its arguments
    assert_close(
        weak_holder_constant(3.0, 1.5),
        weak_holder_constant(1.5, 3.0),
        1e-12,
    );
}

#[test]
fn weak_holder_suite_passes() {
    let rep = weak_holder_suite(300, 3).unwrap();
    assert!(rep.pass(), "first failure: {:?}", rep.first_failure());
}

/// The full weak chain on the coupled fixture: all steps pass, the
/// structured families attain [A_vec] = 4/3 on both sides, and RH
/// degenerates to 1 for equal weights.
#[test]
fn weak_chain_coupled_fixture() {
    let t = unit2();
    let w = fix_w();
    let rep = verify_weak_equivalences(&t, &w, &w, &w, &e22(), 32, 42, 20).unwrap();
    assert!(rep.pass(), "first failure: {:?}", rep.first_failure());
    assert_close(rep.constant("a_vec_p").unwrap(), 4.0 / 3.0, 1e-12);
    assert_close(rep.constant("c_rh").unwrap(), 1.0, 1e-12);
    assert_close(rep.constant("c1_stopped").unwrap(), 4.0 / 3.0, 1e-9);
    assert_close(rep.constant("c2_weak").unwrap(), 4.0 / 3.0, 1e-9);
    let names: Vec<&str> = rep.steps.iter().map(|s| s.step.as_str()).collect();
    for expected in [
        "hitting_weak_le_stopped",
        "levelset_stopped_le_2weak",
        "levelset_stopped_le_deterministic",
        "aggregate_weak_le_stopped",
        "aggregate_stopped_le_2weak",
        "apvec_necessity",
        "weak_le_cw_apvec",
    ] {
        assert!(names.contains(&expected), "missing step {expected}");
    }
}

/// The weak chain holds on seeded random instances across exponent
/// couples and free v.
#[test]
fn weak_chain_seeded_instances() {
    let exponents = [(2.0, 2.0), (2.0, 4.0), (3.0, 1.5), (1.5, 1.5)];
    for trial in 0..12u64 {
        let (p1, p2) = exponents[(trial % 4) as usize];
        let exps = ExponentConfig::new(p1, p2).unwrap();
        let depth = 1 + (trial % 2) as usize;
        let leaves = 1usize << depth;
        let t = marweight_core::FiltrationTree::build_dyadic(depth, None).unwrap();
        let mut rng = rng_for(600, trial);
        let v = lognormal_weight(&mut rng, leaves, 0.6);
        let w1 = lognormal_weight(&mut rng, leaves, 0.6);
        let w2 = lognormal_weight(&mut rng, leaves, 0.6);
        let rep = verify_weak_equivalences(&t, &v, &w1, &w2, &exps, 10, trial, 20).unwrap();
        assert!(
            rep.pass(),
            "trial {trial} ({p1},{p2}): {:?}",
            rep.first_failure()
        );
    }
}

/// The weak ratio of any pair is bounded by c_w [A_vec]; spot-check on a
/// fixed non-trivial pair.
#[test]
fn weak_ratio_below_cw_avec() {
    let t = dy4();
    let w = Weight::new(vec![2.0, 0.5, 1.0, 1.5]).unwrap();
    let v = Weight::new(vec![1.0, 2.0, 0.5, 1.0]).unwrap();
    let exps = e22();
    let f = SimpleFunction::new(vec![3.0, -1.0, 0.0, 2.0]);
    let g = SimpleFunction::new(vec![1.0, 1.0, -2.0, 0.5]);
    let ratio = weak_bilinear_ratio(&t, &v, &w, &w, &exps, &f, &g).unwrap();
    let avec =
        marweight_core::conditions::a_vec_p_constant(&t, &v, &w, &w, &exps).unwrap();
    let cw = weak_holder_constant(2.0, 2.0);
    assert!(ratio <= cw * avec.value * (1.0 + 1e-9));
}

/// Pointwise domination by the product of weighted maximal functions on
/// the coupled fixture and on seeded instances.
#[test]
fn pointwise_domination_holds() {
    let t = unit2();
    let w = fix_w();
    let f = SimpleFunction::new(vec![1.0, 3.0]);
    let g = SimpleFunction::new(vec![2.0, -1.0]);
    let rep = pointwise_domination_check(&t, &w, &w, &w, &e22(), &f, &g).unwrap();
    assert!(rep.pass(), "{:?}", rep.first_failure());

    let t = dy4();
    let exps = ExponentConfig::new(2.0, 4.0).unwrap();
    for trial in 0..50u64 {
        let mut rng = rng_for(601, trial);
        let v = lognormal_weight(&mut rng, 4, 0.7);
        let w1 = lognormal_weight(&mut rng, 4, 0.7);
        let w2 = lognormal_weight(&mut rng, 4, 0.7);
        let f = signed_function(&mut rng, 4, 1.0);
        let g = signed_function(&mut rng, 4, 1.0);
        let rep = pointwise_domination_check(&t, &v, &w1, &w2, &exps, &f, &g).unwrap();
        assert!(rep.pass(), "trial {trial}: {:?}", rep.first_failure());
    }
}

/// Sawyer decomposition of the constant pair on the unit square: one
/// shell k = -1 (since the stopped products are exactly 1), A and B are
/// the whole space, theta = T = 1, and every structural step verifies.
#[test]
fn sawyer_decomposition_unit() {
    let t = dy4();
    let ones = Weight::ones(4);
    let one = ones_fn(4);
    let d = sawyer_decomposition(&t, &one, &one, &ones, &ones, &e22(), &ones).unwrap();
    assert_eq!(d.ks, vec![-1]);
    assert_eq!(d.a_sets.len(), 1);
    assert_eq!(d.a_sets[&(-1, -1)], vec![0, 1, 2, 3]);
    assert_eq!(d.b_sets[&(-1, -1)], vec![0, 1, 2, 3]);
    assert_close(d.theta[&(-1, -1)], 1.0, 1e-12);
    assert_close(d.t[&(-1, -1)], 1.0, 1e-12);
    // tau_{-1} fires immediately, tau_0 never
    assert_eq!(d.taus[&-1].assignment(), &[Some(0); 4]);
    assert_eq!(d.taus[&0].assignment(), &[None; 4]);
    let rep = verify_sawyer(&t, &one, &one, &ones, &ones, &e22(), &ones, &d).unwrap();
    assert!(rep.pass(), "{:?}", rep.first_failure());
    assert_eq!(rep.constant("shell_count"), Some(1.0));
    assert_eq!(rep.constant("cell_count"), Some(1.0));
}

/// Disjoint spikes: the level products vanish after the root, so the
/// decomposition again sees a single unit shell.
#[test]
fn sawyer_decomposition_disjoint_spikes() {
    let t = dy4();
    let ones = Weight::ones(4);
    let f = SimpleFunction::new(vec![4.0, 0.0, 0.0, 0.0]);
    let g = SimpleFunction::new(vec![0.0, 0.0, 4.0, 0.0]);
    let d = sawyer_decomposition(&t, &f, &g, &ones, &ones, &e22(), &ones).unwrap();
    assert_eq!(d.ks, vec![-1]);
    assert_eq!(d.a_sets[&(-1, -1)], vec![0, 1, 2, 3]);
    assert_close(d.theta[&(-1, -1)], 1.0, 1e-12);
    assert_close(d.t[&(-1, -1)], 1.0, 1e-12);
    let rep = verify_sawyer(&t, &f, &g, &ones, &ones, &e22(), &ones, &d).unwrap();
    assert!(rep.pass(), "{:?}", rep.first_failure());
}

#[test]
fn sawyer_rejects_zero_product() {
    let t = dy4();
    let ones = Weight::ones(4);
    let zero = SimpleFunction::constant(0.0, 4);
    assert!(matches!(
        sawyer_decomposition(&t, &zero, &zero, &ones, &ones, &e22(), &ones).unwrap_err(),
        Error::DegenerateInput(_)
    ));
}

/// Sawyer structural verification holds on seeded random instances,
/// including non-trivial sigmas and signed functions.
#[test]
fn sawyer_seeded_instances() {
    let t = dy4();
    let exps = ExponentConfig::new(2.0, 4.0).unwrap();
    for trial in 0..60u64 {
        let mut rng = rng_for(602, trial);
        let v = lognormal_weight(&mut rng, 4, 0.7);
        let w1 = lognormal_weight(&mut rng, 4, 0.7);
        let w2 = lognormal_weight(&mut rng, 4, 0.7);
        let f = signed_function(&mut rng, 4, 1.0);
        let g = signed_function(&mut rng, 4, 1.0);
        let s1 = dual_weight(&w1, exps.p1()).unwrap();
        let s2 = dual_weight(&w2, exps.p2()).unwrap();
        let d = match sawyer_decomposition(&t, &f, &g, &s1, &s2, &exps, &v) {
            Ok(d) => d,
            Err(Error::DegenerateInput(_)) => continue,
            Err(e) => panic!("trial {trial}: {e}"),
        };
        let rep = verify_sawyer(&t, &f, &g, &s1, &s2, &exps, &v, &d).unwrap();
        assert!(rep.pass(), "trial {trial}: {:?}", rep.first_failure());
    }
}

/// The strong chain on unit weights: every constant collapses, leaving
/// the final bound 4 * (1 * 1)^{1/p} * p1' * p2' = 16 at (2,2).
#[test]
fn strong_chain_unit_weights() {
    let t = dy4();
    let ones = Weight::ones(4);
    let rep = verify_strong_chain(&t, &ones, &ones, &ones, &e22(), 24, 7, 20).unwrap();
    assert!(rep.pass(), "first failure: {:?}", rep.first_failure());
    assert_close(rep.constant("final_constant").unwrap(), 16.0, 1e-6);
    assert_close(rep.constant("a_vec_p").unwrap(), 1.0, 1e-9);
    assert_eq!(rep.constant("skipped_draws"), Some(0.0));
    let names: Vec<&str> = rep.steps.iter().map(|s| s.step.as_str()).collect();
    for expected in [
        "shells_int_le_4p_t_theta",
        "layer_cake_le",
        "layer_cake_ge",
        "theta_mass_le_testing_integral",
        "testing_quantity_le_cs",
        "rh_quantity_le_crh",
        "g_subset_superlevel",
        "strong_norm_le_final_constant",
        "weighted_maximal_holder_doob",
        "stopped_factorization",
        "apvec_le_strong",
    ] {
        assert!(names.contains(&expected), "missing step {expected}");
    }
}

/// The strong chain on the coupled fixture and on seeded instances.
#[test]
fn strong_chain_fixture_and_seeded() {
    let t = unit2();
    let w = fix_w();
    let rep = verify_strong_chain(&t, &w, &w, &w, &e22(), 16, 42, 20).unwrap();
    assert!(rep.pass(), "fixture: {:?}", rep.first_failure());

    let exponents = [(2.0, 2.0), (2.0, 4.0), (1.5, 1.5)];
    for trial in 0..6u64 {
        let (p1, p2) = exponents[(trial % 3) as usize];
        let exps = ExponentConfig::new(p1, p2).unwrap();
        let t = dy4();
        let mut rng = rng_for(603, trial);
        let v = lognormal_weight(&mut rng, 4, 0.5);
        let w1 = lognormal_weight(&mut rng, 4, 0.5);
        let w2 = lognormal_weight(&mut rng, 4, 0.5);
        let rep = verify_strong_chain(&t, &v, &w1, &w2, &exps, 8, trial, 20).unwrap();
        assert!(
            rep.pass(),
            "trial {trial} ({p1},{p2}): {:?}",
            rep.first_failure()
        );
    }
}

/// RH weights from the fixture feed the strong chain too; constants stay
/// finite and every step holds.
#[test]
fn strong_chain_rh_fixture() {
    let t = unit2();
    let (w1, w2) = fix_rh();
    let exps = e22();
    let v = w1.pow(exps.p() / exps.p1()).pointwise_mul(&w2.pow(exps.p() / exps.p2()));
    let rep = verify_strong_chain(&t, &v, &w1, &w2, &exps, 16, 3, 20).unwrap();
    assert!(rep.pass(), "{:?}", rep.first_failure());
    assert_close(rep.constant("c_rh").unwrap(), 2.0 / 3.0f64.sqrt(), 1e-9);
}

/// One-weight suite with the unit weight: E_n^w = E_n means every ratio
/// is at most 1, [A_p] = 1, and the finest-level defect vanishes exactly.
#[test]
fn one_weight_unit() {
    let t = dy4();
    let ones = Weight::ones(4);
    let rep = one_weight_suite(&t, &ones, 2.0, 32, 5).unwrap();
    assert!(rep.pass(), "{:?}", rep.first_failure());
    assert_close(rep.constant("a_p").unwrap(), 1.0, 1e-12);
    assert!(rep.constant("en_sup").unwrap() <= 1.0 + 1e-9);
}

/// One-weight suite on the coupled fixture: the E_n ratio stays below
/// [A_p]^{1/p} = (4/3)^{1/2}.
#[test]
fn one_weight_fixture() {
    let t = unit2();
    let w = fix_w();
    let rep = one_weight_suite(&t, &w, 2.0, 64, 5).unwrap();
    assert!(rep.pass(), "{:?}", rep.first_failure());
    assert_close(rep.constant("a_p").unwrap(), 4.0 / 3.0, 1e-12);
    let bound = (4.0f64 / 3.0).sqrt();
    assert!(rep.constant("en_sup").unwrap() <= bound * (1.0 + 1e-9));
    assert!(rep.constant("m_sup").unwrap() >= rep.constant("en_sup").unwrap() - 1e-12);
}

#[test]
fn one_weight_across_exponents() {
    let t = dy4();
    for trial in 0..10u64 {
        let p = [1.5, 2.0, 3.0, 4.0, 8.0][(trial % 5) as usize];
        let mut rng = rng_for(604, trial);
        let w = lognormal_weight(&mut rng, 4, 0.8);
        let rep = one_weight_suite(&t, &w, p, 16, trial).unwrap();
        assert!(rep.pass(), "trial {trial} p={p}: {:?}", rep.first_failure());
    }
}

/// Convergence defect of the spike pair: at the root
/// E_0 f * E_0 g - f g = (1,1,1,1) - (4,0,0,0) has L^1 norm
/// (3 + 1 + 1 + 1)/4 = 3/2; at the finest level it vanishes bit for bit.
#[test]
fn convergence_defect_spike() {
    let t = dy4();
    let ones = Weight::ones(4);
    let f = SimpleFunction::new(vec![4.0, 0.0, 0.0, 0.0]);
    let g = ones_fn(4);
    assert_close(convergence_defect(&t, &f, &g, &ones, &e22(), 0).unwrap(), 1.5, 1e-12);
    assert_eq!(convergence_defect(&t, &f, &g, &ones, &e22(), 2).unwrap(), 0.0);
    assert_eq!(
        convergence_defect(&t, &f, &g, &ones, &e22(), 3).unwrap_err(),
        Error::LevelOutOfRange { level: 3, max: 2 }
    );
}

/// The tail dominator of the spike pair: constituents 2|E_1 f E_1 g| = 8
/// and |fg| + 2 eps, so y = (8, 4, 0.2, 0.2) at eps = 0.1, with both
/// report steps passing and a zero tail.
#[test]
fn tail_dominator_spike() {
    let t = dy4();
    let ones = Weight::ones(4);
    let f = SimpleFunction::new(vec![4.0, 0.0, 0.0, 0.0]);
    let g = ones_fn(4);
    let (y, rep) = construct_tail_dominator(&t, &f, &g, &ones, &e22(), 0.1).unwrap();
    common::assert_values_close(y.values(), &[8.0, 4.0, 0.2, 0.2], 1e-12);
    assert!(rep.pass(), "{:?}", rep.first_failure());
    assert_eq!(rep.constant("tail"), Some(0.0));
    assert_eq!(rep.constant("eps"), Some(0.1));
}

/// Zero functions leave only the epsilon padding: y = 2 eps everywhere,
/// for epsilons across fifteen orders of magnitude.
#[test]
fn tail_dominator_zero_functions_and_epsilons() {
    let t = dy4();
    let ones = Weight::ones(4);
    let zero = SimpleFunction::constant(0.0, 4);
    for eps in [1.0, 1e-3, 1e-9] {
        let (y, rep) = construct_tail_dominator(&t, &zero, &zero, &ones, &e22(), eps).unwrap();
        for x in y.values() {
            assert_eq!(*x, 2.0 * eps);
        }
        assert!(rep.pass());
        assert_eq!(rep.constant("tail"), Some(0.0));
    }
    assert!(construct_tail_dominator(&t, &zero, &zero, &ones, &e22(), 0.0).is_err());
    assert!(construct_tail_dominator(&t, &zero, &zero, &ones, &e22(), -1.0).is_err());
}

/// On seeded instances the dominator construction always yields an empty
/// tail and a passing report, with coupled v.
#[test]
fn tail_dominator_seeded() {
    let t = dy4();
    let exps = ExponentConfig::new(2.0, 4.0).unwrap();
    for trial in 0..40u64 {
        let mut rng = rng_for(605, trial);
        let w1 = lognormal_weight(&mut rng, 4, 0.6);
        let w2 = lognormal_weight(&mut rng, 4, 0.6);
        let v = w1.pow(exps.p() / exps.p1()).pointwise_mul(&w2.pow(exps.p() / exps.p2()));
        let f = signed_function(&mut rng, 4, 1.0);
        let g = signed_function(&mut rng, 4, 1.0);
        let (_, rep) = construct_tail_dominator(&t, &f, &g, &v, &exps, 1e-6).unwrap();
        assert!(rep.pass(), "trial {trial}: {:?}", rep.first_failure());
    }
}

/// Every convergence defect decreases to exactly zero along the
/// filtration on seeded instances (monotone up to tolerance, zero at N).
#[test]
fn convergence_defect_vanishes_at_finest() {
    let t = dy4();
    let exps = e22();
    for trial in 0..40u64 {
        let mut rng = rng_for(606, trial);
        let v = lognormal_weight(&mut rng, 4, 0.6);
        let f = signed_function(&mut rng, 4, 1.0);
        let g = signed_function(&mut rng, 4, 1.0);
        assert_eq!(convergence_defect(&t, &f, &g, &v, &exps, 2).unwrap(), 0.0, "trial {trial}");
    }
}
