//! Subcommand implementations: condition checking, verification suites,
//! oracle cross-checks, extremal search, and the necessity probe.
//!
//! Every command returns a [`CmdOutput`] holding the JSON report, its CSV
//! rendering, and the exit code; IO and flag parsing stay in the crate
//! root. Exit codes: 0 success, 1 a verified/asserted step failed, 2
//! malformed input or configuration, 3 a cap was exceeded.

use marweight_core::conditions::{
    a_p_constant, a_vec_p_constant, rh_constant, s_vec_p_constant, ConditionConstant, Mode,
    RhEvaluator, SetQuantity, SvecEvaluator, Witness,
};
use marweight_core::search::{
    hill_climb, necessity_probe, random_instance, GeneratorConfig, Instance, SearchObjective,
};
use marweight_core::stopping::{count_stopping_times, enumerate_stopping_times};
use marweight_core::theorem::{
    construct_tail_dominator, convergence_defect, le_with_tol, one_weight_suite, sawyer_decomposition,
    verify_sawyer, verify_strong_chain, verify_weak_equivalences, ChainStep, ProofChainReport,
};
use marweight_core::Error;
use serde_json::{json, Map, Value};
use std::fmt::Write as _;

use crate::format::{instance_to_file, LoadedInstance};

/// Failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn bad_input(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn cap(message: impl Into<String>) -> Self {
        CliError { code: 3, message: message.into() }
    }

    /// Library errors map onto the exit-code contract: cap overruns are
    /// exit 3, everything else is malformed input or configuration.
    pub fn from_core(e: Error) -> Self {
        match e {
            Error::CapExceeded { .. } | Error::TooManyStoppingTimes { .. } => {
                CliError::cap(e.to_string())
            }
            _ => CliError::bad_input(e.to_string()),
        }
    }
}

/// A finished command: the report in both formats plus the exit code.
pub struct CmdOutput {
    pub json: Value,
    pub csv: String,
    pub exit: i32,
}

/// Caps governing exhaustive enumeration, overridable via MARWEIGHT_CAP.
#[derive(Clone, Copy, Debug)]
pub struct Caps {
    /// Leaf cap for exact subset enumeration.
    pub exact: usize,
    /// Leaf cap for the oracle command.
    pub oracle_leaves: usize,
    /// Stopping-time enumeration cap.
    pub enumeration: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            exact: marweight_core::conditions::DEFAULT_EXACT_CAP,
            oracle_leaves: 12,
            enumeration: marweight_core::stopping::DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// JSON number that tolerates non-finite values by falling back to their
/// decimal rendering as a string.
fn fnum(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(format!("{x}")))
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::LevelAtom { level, atom, leaves } => json!({
            "kind": "level_atom",
            "level": level,
            "atom": atom,
            "leaves": leaves,
        }),
        Witness::LeafSet(leaves) => json!({
            "kind": "leaf_set",
            "leaves": leaves,
        }),
    }
}

fn constant_json(c: &ConditionConstant) -> Value {
    let mut m = Map::new();
    m.insert("value".into(), fnum(c.value));
    m.insert("exact".into(), Value::Bool(c.exact));
    m.insert("witness".into(), witness_json(&c.witness));
    Value::Object(m)
}

fn steps_json(rep: &ProofChainReport) -> Value {
    Value::Array(
        rep.steps
            .iter()
            .map(|s| {
                json!({
                    "step": s.step,
                    "lhs": fnum(s.lhs),
                    "constant": fnum(s.constant),
                    "rhs": fnum(s.rhs),
                    "pass": s.pass,
                })
            })
            .collect(),
    )
}

fn report_constants_json(rep: &ProofChainReport) -> Value {
    let mut m = Map::new();
    for (name, value) in &rep.constants {
        m.insert(name.clone(), fnum(*value));
    }
    Value::Object(m)
}

fn steps_csv(rep: &ProofChainReport) -> String {
    let mut out = String::from("step,lhs,constant,rhs,pass\n");
    for s in &rep.steps {
        let _ = writeln!(out, "{},{},{},{},{}", s.step, s.lhs, s.constant, s.rhs, s.pass);
    }
    out
}

/// Compute the four condition-constant reports of an instance.
pub fn cmd_check(inst: &LoadedInstance, mode: Mode, caps: &Caps) -> Result<CmdOutput, CliError> {
    let _ = caps;
    let avec = a_vec_p_constant(&inst.tree, &inst.v, &inst.w1, &inst.w2, &inst.exps)
        .map_err(CliError::from_core)?;
    let rh = rh_constant(&inst.tree, &inst.w1, &inst.w2, &inst.exps, mode)
        .map_err(CliError::from_core)?;
    let svec = s_vec_p_constant(&inst.tree, &inst.v, &inst.w1, &inst.w2, &inst.exps, mode)
        .map_err(CliError::from_core)?;
    let ap1 = a_p_constant(&inst.tree, &inst.v, &inst.w1, inst.exps.p1())
        .map_err(CliError::from_core)?;
    let ap2 = a_p_constant(&inst.tree, &inst.v, &inst.w2, inst.exps.p2())
        .map_err(CliError::from_core)?;

    let json = json!({
        "Apvec": constant_json(&avec),
        "RH": constant_json(&rh),
        "Spvec": constant_json(&svec),
        "Ap": { "w1": constant_json(&ap1), "w2": constant_json(&ap2) },
    });
    let mut csv = String::from("constant,value,exact\n");
    for (name, c) in [
        ("Apvec", &avec),
        ("RH", &rh),
        ("Spvec", &svec),
        ("Ap_w1", &ap1),
        ("Ap_w2", &ap2),
    ] {
        let _ = writeln!(csv, "{},{},{}", name, c.value, c.exact);
    }
    Ok(CmdOutput { json, csv, exit: 0 })
}

/// Verification suites driven by the theorem layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Weak,
    Strong,
    Oneweight,
    Convergence,
    Decomposition,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Weak => "weak",
            Suite::Strong => "strong",
            Suite::Oneweight => "oneweight",
            Suite::Convergence => "convergence",
            Suite::Decomposition => "decomposition",
        }
    }
}

/// The convergence suite: tail dominators across three epsilons plus the
/// recorded defect sequence, with an exact zero required at the finest
/// level.
fn convergence_report(inst: &LoadedInstance) -> Result<ProofChainReport, Error> {
    let mut rep = ProofChainReport::default();
    for (tag, eps) in [("1e0", 1.0), ("1e-3", 1e-3), ("1e-9", 1e-9)] {
        let (_, sub) =
            construct_tail_dominator(&inst.tree, &inst.f, &inst.g, &inst.v, &inst.exps, eps)?;
        if let Some(tail) = sub.constant("tail") {
            rep.record(format!("tail_{tag}"), tail);
        }
        for mut step in sub.steps {
            step.step = format!("{}_{tag}", step.step);
            rep.steps.push(step);
        }
    }
    for n in 0..inst.tree.num_levels() {
        let d = convergence_defect(&inst.tree, &inst.f, &inst.g, &inst.v, &inst.exps, n)?;
        rep.record(format!("defect_{n}"), d);
    }
    let at_finest = convergence_defect(
        &inst.tree,
        &inst.f,
        &inst.g,
        &inst.v,
        &inst.exps,
        inst.tree.last_level(),
    )?;
    rep.steps.push(ChainStep::exact_count(
        "defect_at_finest_zero",
        usize::from(at_finest != 0.0),
    ));
    Ok(rep)
}

/// The decomposition suite: build the Sawyer decomposition and verify its
/// set identities; the summary (shells, cells, sets) rides along.
fn decomposition_report(inst: &LoadedInstance) -> Result<(ProofChainReport, Value), Error> {
    let (s1, s2) = inst.sigmas()?;
    let d = sawyer_decomposition(&inst.tree, &inst.f, &inst.g, &s1, &s2, &inst.exps, &inst.v)?;
    let rep = verify_sawyer(&inst.tree, &inst.f, &inst.g, &s1, &s2, &inst.exps, &inst.v, &d)?;
    let cells: Vec<Value> = d
        .a_sets
        .keys()
        .map(|&(k, j)| {
            json!({
                "k": k,
                "j": j,
                "a_set": d.a_sets[&(k, j)],
                "b_set": d.b_sets[&(k, j)],
                "theta": fnum(d.theta[&(k, j)]),
                "t": fnum(d.t[&(k, j)]),
            })
        })
        .collect();
    let summary = json!({ "ks": d.ks, "cells": cells });
    Ok((rep, summary))
}

/// Test hook behind a hidden flag: shrink every step's allowance so the
/// report fails, exercising the exit-1 path end to end.
fn corrupt_report(rep: &mut ProofChainReport) {
    for step in &mut rep.steps {
        step.constant /= 1e9;
        step.rhs /= 1e9;
        step.pass = le_with_tol(step.lhs, step.rhs);
    }
}

pub fn cmd_verify(
    inst: &LoadedInstance,
    suite: Suite,
    trials: u64,
    seed: u64,
    caps: &Caps,
    exact_cap: usize,
    corrupt: bool,
) -> Result<CmdOutput, CliError> {
    let _ = caps;
    if trials == 0 && matches!(suite, Suite::Weak | Suite::Strong | Suite::Oneweight) {
        return Err(CliError::bad_input(format!(
            "suite {} samples trial functions and needs --trials >= 1",
            suite.name()
        )));
    }
    let mut extra: Option<Value> = None;
    let mut rep = match suite {
        Suite::Weak => verify_weak_equivalences(
            &inst.tree, &inst.v, &inst.w1, &inst.w2, &inst.exps, trials, seed, exact_cap,
        )
        .map_err(CliError::from_core)?,
        Suite::Strong => verify_strong_chain(
            &inst.tree, &inst.v, &inst.w1, &inst.w2, &inst.exps, trials, seed, exact_cap,
        )
        .map_err(CliError::from_core)?,
        Suite::Oneweight => {
            one_weight_suite(&inst.tree, &inst.w1, inst.exps.p1(), trials, seed)
                .map_err(CliError::from_core)?
        }
        Suite::Convergence => convergence_report(inst).map_err(CliError::from_core)?,
        Suite::Decomposition => {
            let (rep, summary) = decomposition_report(inst).map_err(CliError::from_core)?;
            extra = Some(summary);
            rep
        }
    };
    if corrupt {
        corrupt_report(&mut rep);
    }

    let pass = rep.pass();
    let mut body = Map::new();
    body.insert("suite".into(), Value::String(suite.name().into()));
    body.insert("pass".into(), Value::Bool(pass));
    body.insert("steps".into(), steps_json(&rep));
    body.insert("constants".into(), report_constants_json(&rep));
    if let Some(summary) = extra {
        body.insert("decomposition".into(), summary);
    }
    if !pass {
        if let Some(step) = rep.first_failure() {
            body.insert("failing_step".into(), Value::String(step.step.clone()));
        }
        body.insert(
            "instance".into(),
            serde_json::to_value(&inst.file).expect("instance serializes"),
        );
    }
    Ok(CmdOutput {
        json: Value::Object(body),
        csv: steps_csv(&rep),
        exit: if pass { 0 } else { 1 },
    })
}

/// Supremum of a quantity over the finite sets of enumerated stopping
/// times, with the same canonical tie-break as the subset supremum.
fn stopping_sup<E: SetQuantity>(
    taus: &[marweight_core::stopping::StoppingTime],
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

fn agreement_json(
    name: &str,
    subset: (f64, Vec<usize>, bool),
    stopping: Option<(f64, Vec<usize>)>,
) -> (Value, bool) {
    let (sub_val, sub_wit, exact) = subset;
    let (stop_val, stop_wit) = match stopping {
        Some(s) => s,
        None => {
            return (
                json!({ "quantity": name, "pass": false, "reason": "no evaluable stopping time" }),
                false,
            )
        }
    };
    let tol = 1e-9 * sub_val.abs().max(1.0);
    let values_agree = (sub_val - stop_val).abs() <= tol;
    let witnesses_agree = sub_wit == stop_wit;
    let pass = values_agree && witnesses_agree && exact;
    (
        json!({
            "quantity": name,
            "subset_sup": fnum(sub_val),
            "stopping_sup": fnum(stop_val),
            "subset_witness": sub_wit,
            "stopping_witness": stop_wit,
            "values_agree": values_agree,
            "witnesses_agree": witnesses_agree,
            "pass": pass,
        }),
        pass,
    )
}

/// Cross-check the subset suprema against exhaustive stopping-time
/// enumeration, and the streaming enumeration against the antichain
/// count.
pub fn cmd_oracle(inst: &LoadedInstance, caps: &Caps) -> Result<CmdOutput, CliError> {
    let leaves = inst.tree.leaf_count();
    if leaves > caps.oracle_leaves {
        return Err(CliError::cap(format!(
            "oracle enumerates exhaustively and needs leaf count <= {}, got {leaves}",
            caps.oracle_leaves
        )));
    }
    let count = count_stopping_times(&inst.tree);
    let taus =
        enumerate_stopping_times(&inst.tree, caps.enumeration).map_err(CliError::from_core)?;
    let count_match = taus.len() as u128 == count;

    let (s1, s2) = inst.sigmas().map_err(CliError::from_core)?;
    let mode = Mode::Exact { cap: caps.oracle_leaves.max(leaves) };

    let mut rh_eval =
        RhEvaluator::new(&inst.tree, &s1, &s2, &inst.exps).map_err(CliError::from_core)?;
    let rh_subset = marweight_core::conditions::sup_over_sets(&inst.tree, mode, &mut rh_eval)
        .map_err(CliError::from_core)?;
    let rh_stopping = stopping_sup(&taus, &mut rh_eval);
    let (rh_json, rh_pass) = agreement_json("RH", rh_subset, rh_stopping);

    let mut sv_eval = SvecEvaluator::new(&inst.tree, &inst.v, &s1, &s2, &inst.exps)
        .map_err(CliError::from_core)?;
    let sv_subset = marweight_core::conditions::sup_over_sets(&inst.tree, mode, &mut sv_eval)
        .map_err(CliError::from_core)?;
    let sv_stopping = stopping_sup(&taus, &mut sv_eval);
    let (sv_json, sv_pass) = agreement_json("Spvec", sv_subset, sv_stopping);

    let pass = count_match && rh_pass && sv_pass;
    let json = json!({
        "leaf_count": leaves,
        "stopping_time_count": u64::try_from(count).map(Value::from).unwrap_or_else(|_| Value::String(count.to_string())),
        "enumerated": taus.len(),
        "count_match": count_match,
        "rh": rh_json,
        "spvec": sv_json,
        "pass": pass,
    });
    let mut csv = String::from("key,value\n");
    let _ = writeln!(csv, "leaf_count,{leaves}");
    let _ = writeln!(csv, "stopping_time_count,{count}");
    let _ = writeln!(csv, "enumerated,{}", taus.len());
    let _ = writeln!(csv, "count_match,{count_match}");
    let _ = writeln!(csv, "rh_pass,{rh_pass}");
    let _ = writeln!(csv, "spvec_pass,{sv_pass}");
    let _ = writeln!(csv, "pass,{pass}");
    Ok(CmdOutput { json, csv, exit: if pass { 0 } else { 1 } })
}

fn instance_json(inst: &Instance) -> Value {
    let file = instance_to_file(
        &inst.tree,
        &inst.v,
        &inst.w1,
        &inst.w2,
        inst.exps.p1(),
        inst.exps.p2(),
        &inst.f,
        &inst.g,
    );
    serde_json::to_value(&file).expect("instance serializes")
}

/// Build the climb's starting instance: the loaded file if one was given,
/// a seeded random instance otherwise.
pub fn search_start(
    loaded: Option<&LoadedInstance>,
    depth: usize,
    p1: f64,
    p2: f64,
    seed: u64,
) -> Result<Instance, CliError> {
    match loaded {
        Some(inst) => Ok(Instance {
            tree: inst.tree.clone(),
            v: inst.v.clone(),
            w1: inst.w1.clone(),
            w2: inst.w2.clone(),
            exps: inst.exps,
            f: inst.f.clone(),
            g: inst.g.clone(),
        }),
        None => {
            let cfg = GeneratorConfig { depth, p1, p2, ..GeneratorConfig::default() };
            random_instance(&cfg, seed).map_err(CliError::from_core)
        }
    }
}

pub fn cmd_search(
    objective: &str,
    start: &Instance,
    budget: u64,
    seed: u64,
) -> Result<CmdOutput, CliError> {
    let obj = SearchObjective::parse(objective).ok_or_else(|| {
        CliError::bad_input(format!(
            "unknown objective {objective:?}; expected one of {}",
            SearchObjective::all().map(|o| o.name()).join(", ")
        ))
    })?;
    let res = hill_climb(obj, start, budget, seed).map_err(CliError::from_core)?;
    let trace: Vec<Value> =
        res.trace.iter().map(|(it, val)| json!([it, fnum(*val)])).collect();
    let json = json!({
        "objective": obj.name(),
        "best_value": fnum(res.best_value),
        "seed": res.seed,
        "budget": res.budget,
        "trace": trace,
        "best_instance": instance_json(&res.best_instance),
    });
    let mut csv = String::from("iteration,value\n");
    for (it, val) in &res.trace {
        let _ = writeln!(csv, "{it},{val}");
    }
    Ok(CmdOutput { json, csv, exit: 0 })
}

pub fn cmd_necessity(budget: u64, seed: u64) -> Result<CmdOutput, CliError> {
    let rep = necessity_probe(budget, seed).map_err(CliError::from_core)?;
    let entries: Vec<Value> = rep
        .entries
        .iter()
        .map(|e| {
            json!({
                "gap": fnum(e.gap),
                "c_rh": fnum(e.c_rh),
                "a_vec": fnum(e.a_vec),
                "c1": fnum(e.c1),
                "equal_weights": e.equal_weights,
                "instance": instance_json(&e.instance),
            })
        })
        .collect();
    let json = json!({
        "seed": rep.seed,
        "budget": rep.budget,
        "entries": entries,
    });
    let mut csv = String::from("rank,gap,c_rh,a_vec,c1,equal_weights\n");
    for (rank, e) in rep.entries.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{rank},{},{},{},{},{}",
            e.gap, e.c_rh, e.a_vec, e.c1, e.equal_weights
        );
    }
    Ok(CmdOutput { json, csv, exit: 0 })
}

/// Parse MARWEIGHT_CAP if set; it overrides the subset-enumeration and
/// oracle leaf caps.
pub fn caps_from_env() -> Result<Caps, CliError> {
    let mut caps = Caps::default();
    match std::env::var("MARWEIGHT_CAP") {
        Ok(s) => {
            let n: usize = s.trim().parse().map_err(|_| {
                CliError::bad_input(format!("MARWEIGHT_CAP must be a nonnegative integer, got {s:?}"))
            })?;
            caps.exact = n;
            caps.oracle_leaves = n;
            Ok(caps)
        }
        Err(std::env::VarError::NotPresent) => Ok(caps),
        Err(e) => Err(CliError::bad_input(format!("MARWEIGHT_CAP: {e}"))),
    }
}

/// Resolve the subset-sup mode for `check` from the flags.
pub fn check_mode(
    sampled: bool,
    budget: u64,
    seed: Option<u64>,
    caps: &Caps,
) -> Result<Mode, CliError> {
    if sampled {
        let seed = seed.ok_or_else(|| {
            CliError::bad_input("--mode sampled needs an explicit --seed (reports must be reproducible)")
        })?;
        let budget = usize::try_from(budget)
            .map_err(|_| CliError::bad_input("--budget too large for this platform"))?;
        Ok(Mode::Sampled { budget, seed })
    } else {
        Ok(Mode::Exact { cap: caps.exact })
    }
}

/// Unit instance used when no file is given (search excepted, which draws
/// a random start).
pub fn default_instance(depth: usize, p1: f64, p2: f64) -> Result<LoadedInstance, CliError> {
    crate::format::unit_instance(depth, p1, p2).map_err(CliError::bad_input)
}
