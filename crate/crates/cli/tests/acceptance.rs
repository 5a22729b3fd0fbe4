//! Acceptance gate: one test per criterion, each printing a single
//! `ACCEPTANCE criterion NN <name>: PASS|FAIL` line (visible under
//! `cargo test --test acceptance -- --nocapture`, and in the failure
//! output otherwise). Tolerances are pinned in each criterion body.

use std::process::Command;
use std::time::{Duration, Instant};

use marweight_core::conditions::{
    a_vec_p_constant, rh_constant, s_vec_p_constant, sup_over_sets, Mode, RhEvaluator,
    SetQuantity, SvecEvaluator,
};
use marweight_core::func::{lp_norm, weak_lp_norm};
use marweight_core::maximal::{bisublinear_maximal, doob_maximal};
use marweight_core::search::{random_instance, GeneratorConfig, Instance};
use marweight_core::stopping::{count_stopping_times, enumerate_stopping_times, StoppingTime};
use marweight_core::theorem::{
    construct_tail_dominator, convergence_defect, le_with_tol, pointwise_domination_check,
    sawyer_decomposition, verify_sawyer, verify_weak_equivalences, weak_holder_suite,
};
use marweight_core::{dual_weight, Error, ExponentConfig, FiltrationTree, Weight};

fn conclude(num: u32, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE criterion {num:02} {name}: {verdict} ({detail})");
    assert!(pass, "criterion {num:02} {name} failed: {detail}");
}

/// Record a failure, keeping only the first few for the report line.
fn note(failures: &mut Vec<String>, text: String) {
    if failures.len() < 5 {
        failures.push(text);
    }
}

fn detail_line(failures: &[String], ok_text: String) -> String {
    if failures.is_empty() {
        ok_text
    } else {
        failures.join("; ")
    }
}

/// The shared sample for the chain criteria: depths 1..=4, the exponent
/// grid below, alternating free and coupled v, alternating uniform and
/// random masses, all seeded.
const CHAIN_EXPONENTS: [(f64, f64); 5] =
    [(2.0, 2.0), (2.0, 4.0), (3.0, 1.5), (3.0, 4.5), (1.5, 1.5)];
const CHAIN_SAMPLE_SIZE: u64 = 1000;

fn chain_sample() -> Vec<Instance> {
    (0..CHAIN_SAMPLE_SIZE)
        .map(|i| {
            let (p1, p2) = CHAIN_EXPONENTS[(i % 5) as usize];
            let cfg = GeneratorConfig {
                depth: 1 + (i % 4) as usize,
                p1,
                p2,
                coupled_v: i.is_multiple_of(2),
                random_masses: i.is_multiple_of(3),
                ..GeneratorConfig::default()
            };
            random_instance(&cfg, 0x0C41_0000 + i).expect("valid generator config")
        })
        .collect()
}

#[test]
fn criterion_01_exact_fixtures() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let unit2: FiltrationTree<f64> = FiltrationTree::build_dyadic(1, None).unwrap();
    let dy4: FiltrationTree<f64> = FiltrationTree::build_dyadic(2, None).unwrap();
    let e22 = ExponentConfig::new(2.0, 2.0).unwrap();
    let ones2 = Weight::ones(2);
    let ones4 = Weight::ones(4);

    let a2 = a_vec_p_constant(&unit2, &ones2, &ones2, &ones2, &e22).unwrap().value;
    if a2 != 1.0 {
        note(&mut failures, format!("a_vec unit2 = {a2}, wanted exactly 1"));
    }
    let a4 = a_vec_p_constant(&dy4, &ones4, &ones4, &ones4, &e22).unwrap().value;
    if a4 != 1.0 {
        note(&mut failures, format!("a_vec dy4 = {a4}, wanted exactly 1"));
    }

    let w = Weight::new(vec![1.5, 0.5]).unwrap();
    let aw = a_vec_p_constant(&unit2, &w, &w, &w, &e22).unwrap().value;
    if (aw - 4.0 / 3.0).abs() > 1e-12 {
        note(&mut failures, format!("a_vec on (3/2, 1/2) = {aw}, wanted 4/3 within 1e-12"));
    }

    let w1 = Weight::new(vec![2.0 / 3.0, 2.0]).unwrap();
    let w2 = Weight::new(vec![2.0, 2.0 / 3.0]).unwrap();
    let rh = rh_constant(&unit2, &w1, &w2, &e22, Mode::Exact { cap: 20 }).unwrap().value;
    let rh_expected = 2.0 / 3.0f64.sqrt();
    if (rh - rh_expected).abs() > 1e-9 {
        note(&mut failures, format!("rh = {rh}, wanted 2/sqrt(3) within 1e-9"));
    }

    let s4 = s_vec_p_constant(&dy4, &ones4, &ones4, &ones4, &e22, Mode::Exact { cap: 20 })
        .unwrap()
        .value;
    if (s4 - 1.0).abs() > 1e-12 {
        note(&mut failures, format!("s_vec unit dy4 = {s4}, wanted 1 within 1e-12"));
    }

    let elapsed = started.elapsed();
    if elapsed >= Duration::from_secs(1) {
        note(&mut failures, format!("runtime {elapsed:?} exceeds 1 s"));
    }
    conclude(1, "exact_fixtures", failures.is_empty(), detail_line(&failures, format!("{elapsed:?}")));
}

#[test]
fn criterion_02_doob_suite() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let total = 10_000u64;
    for i in 0..total {
        let cfg = GeneratorConfig {
            depth: 1 + (i % 5) as usize,
            random_masses: i.is_multiple_of(2),
            ..GeneratorConfig::default()
        };
        let inst = random_instance(&cfg, 0xD00B_0000 + i).unwrap();
        let unit = Weight::ones(inst.tree.leaf_count());
        let mf = doob_maximal(&inst.tree, &inst.f).unwrap();
        let weak = weak_lp_norm(&inst.tree, &mf, 1.0, &unit).unwrap();
        let strong = lp_norm(&inst.tree, &inst.f, 1.0, &unit).unwrap();
        if !le_with_tol(weak, strong) {
            note(&mut failures, format!("weak (1,1) violated at seed {i}: {weak} > {strong}"));
        }
        for q in [1.5, 2.0, 3.0, 8.0] {
            let lhs = lp_norm(&inst.tree, &mf, q, &unit).unwrap();
            let rhs = q / (q - 1.0) * lp_norm(&inst.tree, &inst.f, q, &unit).unwrap();
            if !le_with_tol(lhs, rhs) {
                note(&mut failures, format!("L^{q} bound violated at seed {i}: {lhs} > {rhs}"));
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed >= Duration::from_secs(30) {
        note(&mut failures, format!("runtime {elapsed:?} exceeds 30 s"));
    }
    conclude(
        2,
        "doob_suite",
        failures.is_empty(),
        detail_line(&failures, format!("{total} instances, 5 bounds each, {elapsed:?}")),
    );
}

#[test]
fn criterion_03_weak_equivalence_chain() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let sample = chain_sample();
    for (i, inst) in sample.iter().enumerate() {
        let rep = verify_weak_equivalences(
            &inst.tree,
            &inst.v,
            &inst.w1,
            &inst.w2,
            &inst.exps,
            4,
            0x3EED_0000 + i as u64,
            12,
        )
        .unwrap();
        if !rep.pass() {
            let step = rep.first_failure().map(|s| s.step.clone()).unwrap_or_default();
            note(&mut failures, format!("instance {i}: step {step} failed"));
            continue;
        }
        let necessity: Vec<_> =
            rep.steps.iter().filter(|s| s.step == "apvec_necessity").collect();
        if necessity.is_empty() || necessity.iter().any(|s| !s.pass) {
            note(&mut failures, format!("instance {i}: necessity inequality missing or failed"));
        }
    }
    let elapsed = started.elapsed();
    if elapsed >= Duration::from_secs(120) {
        note(&mut failures, format!("runtime {elapsed:?} exceeds 2 min"));
    }
    conclude(
        3,
        "weak_equivalence_chain",
        failures.is_empty(),
        detail_line(&failures, format!("{} instances, {elapsed:?}", sample.len())),
    );
}

#[test]
fn criterion_04_pointwise_domination() {
    let mut failures = Vec::new();
    let sample = chain_sample();
    for (i, inst) in sample.iter().enumerate() {
        let rep = pointwise_domination_check(
            &inst.tree, &inst.v, &inst.w1, &inst.w2, &inst.exps, &inst.f, &inst.g,
        )
        .unwrap();
        if !rep.pass() {
            note(&mut failures, format!("instance {i}: domination failed on some leaf"));
        }
        let avec = a_vec_p_constant(&inst.tree, &inst.v, &inst.w1, &inst.w2, &inst.exps)
            .unwrap()
            .value;
        let used = rep.steps[0].constant;
        if used != avec {
            note(&mut failures, format!("instance {i}: constant {used} is not the computed A_p-vector {avec}"));
        }
    }
    conclude(
        4,
        "pointwise_domination",
        failures.is_empty(),
        detail_line(&failures, format!("{} instances, constant bitwise equal to A_p-vector", sample.len())),
    );
}

#[test]
fn criterion_05_sawyer_decomposition() {
    let mut failures = Vec::new();
    let target = 1000u64;
    let mut verified = 0u64;
    let mut draws = 0u64;
    while verified < target {
        let i = draws;
        draws += 1;
        assert!(draws < 20_000, "generator kept producing degenerate instances");
        let (p1, p2) = CHAIN_EXPONENTS[(i % 5) as usize];
        let cfg = GeneratorConfig {
            depth: 1 + (i % 3) as usize,
            p1,
            p2,
            random_masses: i.is_multiple_of(3),
            ..GeneratorConfig::default()
        };
        let inst = random_instance(&cfg, 0x5A73_0000 + i).unwrap();
        let s1 = dual_weight(&inst.w1, p1).unwrap();
        let s2 = dual_weight(&inst.w2, p2).unwrap();
        let d = match sawyer_decomposition(
            &inst.tree, &inst.f, &inst.g, &s1, &s2, &inst.exps, &inst.v,
        ) {
            Ok(d) => d,
            Err(Error::DegenerateInput(_)) => continue,
            Err(e) => {
                note(&mut failures, format!("draw {i}: unexpected error {e}"));
                continue;
            }
        };
        let rep =
            verify_sawyer(&inst.tree, &inst.f, &inst.g, &s1, &s2, &inst.exps, &inst.v, &d)
                .unwrap();
        if !rep.pass() {
            let step = rep.first_failure().map(|s| s.step.clone()).unwrap_or_default();
            note(&mut failures, format!("draw {i}: step {step} failed"));
        }
        verified += 1;
    }
    conclude(
        5,
        "sawyer_decomposition",
        failures.is_empty(),
        detail_line(&failures, format!("{verified} decompositions verified, {draws} draws")),
    );
}

#[test]
fn criterion_06_strong_final_bound() {
    let mut failures = Vec::new();
    let sample = chain_sample();
    for (i, inst) in sample.iter().enumerate() {
        let exps = &inst.exps;
        let s1 = dual_weight(&inst.w1, exps.p1()).unwrap();
        let s2 = dual_weight(&inst.w2, exps.p2()).unwrap();
        let fs1 = inst.f.pointwise_mul(&s1.as_function());
        let gs2 = inst.g.pointwise_mul(&s2.as_function());
        let m = bisublinear_maximal(&inst.tree, &fs1, &gs2).unwrap();
        let lhs = lp_norm(&inst.tree, &m, exps.p(), &inst.v).unwrap();

        let mode = Mode::Exact { cap: 16 };
        let cs = s_vec_p_constant(&inst.tree, &inst.v, &inst.w1, &inst.w2, exps, mode).unwrap();
        let crh = rh_constant(&inst.tree, &inst.w1, &inst.w2, exps, mode).unwrap();
        if !cs.exact || !crh.exact {
            note(&mut failures, format!("instance {i}: constants not exact at {} leaves", inst.tree.leaf_count()));
        }
        let constant = 4.0
            * (cs.value.powf(exps.p()) * crh.value).powf(1.0 / exps.p())
            * exps.p1_prime()
            * exps.p2_prime();
        let rhs = constant
            * lp_norm(&inst.tree, &inst.f, exps.p1(), &s1).unwrap()
            * lp_norm(&inst.tree, &inst.g, exps.p2(), &s2).unwrap();
        if !le_with_tol(lhs, rhs) {
            note(&mut failures, format!("instance {i}: {lhs} > {rhs}"));
        }
    }
    conclude(
        6,
        "strong_final_bound",
        failures.is_empty(),
        detail_line(&failures, format!("{} instances, exact-mode constants", sample.len())),
    );
}

/// Supremum over enumerated stopping times with the canonical tie-break
/// (higher value, then lexicographically smaller active set) — the
/// independent oracle for criterion 7.
fn stopping_oracle_sup<E: SetQuantity>(
    taus: &[StoppingTime],
    eval: &mut E,
) -> Option<(f64, Vec<usize>)> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for tau in taus {
        let b = tau.finite_set();
        if b.is_empty() {
            continue;
        }
        if let Some(value) = eval.evaluate(&b) {
            let better = match &best {
                None => true,
                Some((bv, bs)) => value > *bv || (value == *bv && b < *bs),
            };
            if better {
                best = Some((value, b));
            }
        }
    }
    best
}

#[test]
fn criterion_07_oracle_agreement() {
    let mut failures = Vec::new();

    let mixed12_levels = vec![
        vec![(0..12).collect::<Vec<_>>()],
        vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![8, 9, 10, 11]],
        vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7], vec![8, 9], vec![10, 11]],
        (0..12).map(|i| vec![i]).collect(),
    ];
    let mixed12: FiltrationTree<f64> =
        FiltrationTree::new(vec![1.0 / 12.0; 12], mixed12_levels).unwrap();

    type OracleCase = (&'static str, FiltrationTree<f64>, Vec<f64>, Vec<f64>, (f64, f64), u128);
    let cases: Vec<OracleCase> = vec![
        ("unit2", FiltrationTree::build_dyadic(1, None).unwrap(), vec![1.0; 2], vec![1.0; 2], (2.0, 2.0), 5),
        ("dy4", FiltrationTree::build_dyadic(2, None).unwrap(), vec![1.5, 0.5, 1.0, 2.0], vec![1.0, 2.0, 0.5, 1.0], (2.0, 2.0), 26),
        ("dy8", FiltrationTree::build_dyadic(3, None).unwrap(),
            vec![1.5, 0.5, 2.0, 1.0, 0.25, 1.0, 1.0, 0.5],
            vec![1.0, 2.0, 0.5, 1.0, 1.0, 0.75, 1.25, 1.0], (2.0, 4.0), 677),
        ("mixed12", mixed12, vec![1.0; 12], vec![1.5, 0.5, 1.0, 1.0, 2.0, 0.25, 1.0, 1.0, 0.5, 1.5, 1.0, 1.0], (2.0, 2.0), 17577),
    ];

    for (name, tree, w1_vals, w2_vals, (p1, p2), expected_count) in &cases {
        let count = count_stopping_times(tree);
        if count != *expected_count {
            note(&mut failures, format!("{name}: count {count}, wanted {expected_count}"));
        }
        let taus = enumerate_stopping_times(tree, 1_000_000).unwrap();
        if taus.len() as u128 != count {
            note(&mut failures, format!("{name}: enumerated {} of {count}", taus.len()));
        }

        let exps = ExponentConfig::new(*p1, *p2).unwrap();
        let w1 = Weight::new(w1_vals.clone()).unwrap();
        let w2 = Weight::new(w2_vals.clone()).unwrap();
        let v = Weight::ones(tree.leaf_count());
        let s1 = dual_weight(&w1, *p1).unwrap();
        let s2 = dual_weight(&w2, *p2).unwrap();
        let mode = Mode::Exact { cap: 12 };

        let mut rh_eval = RhEvaluator::new(tree, &s1, &s2, &exps).unwrap();
        let (rh_sub, rh_wit, rh_exact) = sup_over_sets(tree, mode, &mut rh_eval).unwrap();
        let (rh_stop, rh_stop_wit) = stopping_oracle_sup(&taus, &mut rh_eval).unwrap();
        let tol = 1e-9 * rh_sub.abs().max(1.0);
        if !rh_exact || (rh_sub - rh_stop).abs() > tol || rh_wit != rh_stop_wit {
            note(&mut failures, format!("{name}: RH disagreement {rh_sub} vs {rh_stop}"));
        }

        let mut sv_eval = SvecEvaluator::new(tree, &v, &s1, &s2, &exps).unwrap();
        let (sv_sub, sv_wit, sv_exact) = sup_over_sets(tree, mode, &mut sv_eval).unwrap();
        let (sv_stop, sv_stop_wit) = stopping_oracle_sup(&taus, &mut sv_eval).unwrap();
        let tol = 1e-9 * sv_sub.abs().max(1.0);
        if !sv_exact || (sv_sub - sv_stop).abs() > tol || sv_wit != sv_stop_wit {
            note(&mut failures, format!("{name}: testing-quantity disagreement {sv_sub} vs {sv_stop}"));
        }
    }
    conclude(
        7,
        "oracle_agreement",
        failures.is_empty(),
        detail_line(&failures, format!("{} trees, counts and both suprema agree", cases.len())),
    );
}

#[test]
fn criterion_08_convergence() {
    let mut failures = Vec::new();
    let total = 200u64;
    for i in 0..total {
        let (p1, p2) = CHAIN_EXPONENTS[(i % 5) as usize];
        let cfg = GeneratorConfig {
            depth: 1 + (i % 4) as usize,
            p1,
            p2,
            coupled_v: true,
            random_masses: i.is_multiple_of(2),
            ..GeneratorConfig::default()
        };
        let inst = random_instance(&cfg, 0xC0 + i).unwrap();
        let last = inst.tree.last_level();
        let at_finest =
            convergence_defect(&inst.tree, &inst.f, &inst.g, &inst.v, &inst.exps, last).unwrap();
        if at_finest != 0.0 {
            note(&mut failures, format!("instance {i}: defect at finest level is {at_finest}, not exactly 0"));
        }
        for eps in [1.0, 1e-3, 1e-9] {
            let (_, rep) =
                construct_tail_dominator(&inst.tree, &inst.f, &inst.g, &inst.v, &inst.exps, eps)
                    .unwrap();
            if !rep.pass() {
                note(&mut failures, format!("instance {i}: tail dominator failed at eps {eps}"));
            }
            let tail = rep.constant("tail").unwrap_or(f64::NAN);
            if tail.is_nan() || tail > eps {
                note(&mut failures, format!("instance {i}: reported tail {tail} exceeds eps {eps}"));
            }
        }
        let defects: Vec<f64> = (0..inst.tree.num_levels())
            .map(|n| {
                convergence_defect(&inst.tree, &inst.f, &inst.g, &inst.v, &inst.exps, n).unwrap()
            })
            .collect();
        if !defects.iter().all(|d| d.is_finite()) {
            note(&mut failures, format!("instance {i}: non-finite defect in {defects:?}"));
        }
    }
    conclude(
        8,
        "convergence",
        failures.is_empty(),
        detail_line(&failures, format!("{total} coupled-v instances, three epsilons each")),
    );
}

#[test]
fn criterion_09_byte_determinism() {
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().expect("tempdir");
    let fixture = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/fix_rh.json");

    let verify_args = |out: &std::path::Path| {
        vec![
            "verify".to_owned(),
            "--suite".to_owned(),
            "weak".to_owned(),
            "--instance".to_owned(),
            fixture.to_str().unwrap().to_owned(),
            "--trials".to_owned(),
            "80".to_owned(),
            "--seed".to_owned(),
            "21".to_owned(),
            "--out".to_owned(),
            out.to_str().unwrap().to_owned(),
        ]
    };
    let search_args = |out: &std::path::Path| {
        vec![
            "search".to_owned(),
            "--objective".to_owned(),
            "apvec_over_stopped_times_rh".to_owned(),
            "--depth".to_owned(),
            "2".to_owned(),
            "--budget".to_owned(),
            "50".to_owned(),
            "--seed".to_owned(),
            "13".to_owned(),
            "--out".to_owned(),
            out.to_str().unwrap().to_owned(),
        ]
    };

    for (label, argsf) in [
        ("verify", &verify_args as &dyn Fn(&std::path::Path) -> Vec<String>),
        ("search", &search_args),
    ] {
        let a = dir.path().join(format!("{label}_a.json"));
        let b = dir.path().join(format!("{label}_b.json"));
        for path in [&a, &b] {
            let status = Command::new(env!("CARGO_BIN_EXE_marweight"))
                .env_remove("MARWEIGHT_CAP")
                .args(argsf(path))
                .status()
                .expect("binary runs");
            if status.code() != Some(0) {
                note(&mut failures, format!("{label} run exited {:?}", status.code()));
            }
        }
        let bytes_a = std::fs::read(&a).unwrap_or_default();
        let bytes_b = std::fs::read(&b).unwrap_or_default();
        if bytes_a.is_empty() || bytes_a != bytes_b {
            note(&mut failures, format!("{label} reports differ across runs"));
        }
    }
    conclude(
        9,
        "byte_determinism",
        failures.is_empty(),
        detail_line(&failures, "verify and search reports byte-identical across two runs".to_owned()),
    );
}

#[test]
fn criterion_10_weak_holder_constant() {
    let mut failures = Vec::new();
    // 3000 trials cycle depths 1..=3, so at least 1000 are two-level
    // (depth 1) instances; the constant must never be beaten.
    let rep = weak_holder_suite(3000, 0x10DE).unwrap();
    if !rep.pass() {
        note(&mut failures, "a product weak norm exceeded c_w(p1,p2)".to_owned());
    }
    let trials = rep.constant("trials").unwrap_or(0.0);
    if trials < 3000.0 {
        note(&mut failures, format!("only {trials} trials ran"));
    }
    conclude(
        10,
        "weak_holder_constant",
        failures.is_empty(),
        detail_line(&failures, format!("{trials} product instances, no violation")),
    );
}
