//! Instance bundle format shared by every subcommand, plus atomic file
//! output.
//!
//! One JSON schema describes a problem instance end to end:
//!
//! ```json
//! {
//!   "tree":      { "masses": [...], "levels": [[[0,1],[2,3]], ...] },
//!   "weights":   { "v": [...], "w1": [...], "w2": [...] },
//!   "exponents": { "p1": 2.0, "p2": 2.0 },
//!   "functions": { "f": [...], "g": [...] }
//! }
//! ```
//!
//! `weights`, `exponents`, and `functions` are optional: missing weights
//! default to 1, missing exponents fall back to the command-line flags,
//! missing functions default to the constant 1. Numeric entries are
//! either JSON numbers (round-tripping bit for bit through the shortest
//! float representation) or strings `"n/d"` holding exact rationals.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use marweight_core::{
    dual_weight, ExponentConfig, FiltrationTree, SimpleFunction, Weight,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A number in an instance file: an exact rational rendered as `"n/d"`,
/// or a float rendered as a JSON number.
#[derive(Clone, Debug, PartialEq)]
pub enum Num {
    Rat(BigRational),
    F(f64),
}

impl Num {
    /// Nearest float; exact rationals may round here, floats pass through.
    pub fn to_f64(&self) -> Result<f64, String> {
        match self {
            Num::F(x) => Ok(*x),
            Num::Rat(r) => r
                .to_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("rational {r} does not fit in an f64")),
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Num::F(x) => s.serialize_f64(*x),
            Num::Rat(r) => s.serialize_str(&format!("{}/{}", r.numer(), r.denom())),
        }
    }
}

struct NumVisitor;

impl Visitor<'_> for NumVisitor {
    type Value = Num;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a JSON number or a rational string \"n/d\"")
    }

    fn visit_f64<E: de::Error>(self, x: f64) -> Result<Num, E> {
        Ok(Num::F(x))
    }

    fn visit_i64<E: de::Error>(self, x: i64) -> Result<Num, E> {
        Ok(Num::F(x as f64))
    }

    fn visit_u64<E: de::Error>(self, x: u64) -> Result<Num, E> {
        Ok(Num::F(x as f64))
    }

    fn visit_str<E: de::Error>(self, s: &str) -> Result<Num, E> {
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let n = BigInt::from_str(num.trim())
            .map_err(|_| E::custom(format!("bad rational numerator in {s:?}")))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|_| E::custom(format!("bad rational denominator in {s:?}")))?;
        if d == BigInt::from(0) {
            return Err(E::custom(format!("zero denominator in {s:?}")));
        }
        Ok(Num::Rat(BigRational::new(n, d)))
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Num, D::Error> {
        d.deserialize_any(NumVisitor)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub masses: Vec<Num>,
    pub levels: Vec<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub v: Vec<Num>,
    pub w1: Vec<Num>,
    pub w2: Vec<Num>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsFile {
    pub p1: f64,
    pub p2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionsFile {
    pub f: Vec<Num>,
    pub g: Vec<Num>,
}

/// The on-disk instance bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub tree: TreeFile,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights: Option<WeightsFile>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exponents: Option<ExponentsFile>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub functions: Option<FunctionsFile>,
}

/// An instance materialized for computation, keeping the parsed file
/// around so failure reports can echo it verbatim.
#[derive(Clone, Debug)]
pub struct LoadedInstance {
    pub tree: FiltrationTree<f64>,
    pub v: Weight<f64>,
    pub w1: Weight<f64>,
    pub w2: Weight<f64>,
    pub exps: ExponentConfig,
    pub f: SimpleFunction<f64>,
    pub g: SimpleFunction<f64>,
    pub file: InstanceFile,
}

impl LoadedInstance {
    /// Dual weights of `(w1, w2)` at `(p1, p2)`.
    pub fn sigmas(&self) -> Result<(Weight<f64>, Weight<f64>), marweight_core::Error> {
        Ok((
            dual_weight(&self.w1, self.exps.p1())?,
            dual_weight(&self.w2, self.exps.p2())?,
        ))
    }
}

fn to_f64_vec(nums: &[Num], what: &str) -> Result<Vec<f64>, String> {
    nums.iter()
        .enumerate()
        .map(|(i, n)| n.to_f64().map_err(|e| format!("{what}[{i}]: {e}")))
        .collect()
}

/// Materialize a parsed file, defaulting absent sections: unit weights,
/// flag exponents, constant-one functions.
pub fn load_instance(
    file: InstanceFile,
    flag_p1: f64,
    flag_p2: f64,
) -> Result<LoadedInstance, String> {
    let masses = to_f64_vec(&file.tree.masses, "tree.masses")?;
    let tree = FiltrationTree::new(masses, file.tree.levels.clone())
        .map_err(|e| format!("tree: {e}"))?;
    let leaves = tree.leaf_count();

    let weight = |nums: &[Num], what: &str| -> Result<Weight<f64>, String> {
        Weight::new(to_f64_vec(nums, what)?).map_err(|e| format!("{what}: {e}"))
    };
    let (v, w1, w2) = match &file.weights {
        Some(w) => (
            weight(&w.v, "weights.v")?,
            weight(&w.w1, "weights.w1")?,
            weight(&w.w2, "weights.w2")?,
        ),
        None => (
            Weight::ones(leaves),
            Weight::ones(leaves),
            Weight::ones(leaves),
        ),
    };

    let (p1, p2) = match &file.exponents {
        Some(e) => (e.p1, e.p2),
        None => (flag_p1, flag_p2),
    };
    let exps = ExponentConfig::new(p1, p2).map_err(|e| format!("exponents: {e}"))?;

    let (f, g) = match &file.functions {
        Some(fns) => (
            SimpleFunction::new(to_f64_vec(&fns.f, "functions.f")?),
            SimpleFunction::new(to_f64_vec(&fns.g, "functions.g")?),
        ),
        None => (
            SimpleFunction::constant(1.0, leaves),
            SimpleFunction::constant(1.0, leaves),
        ),
    };
    for (name, len) in [("v", v.len()), ("w1", w1.len()), ("w2", w2.len()), ("f", f.len()), ("g", g.len())] {
        if len != leaves {
            return Err(format!(
                "{name} has {len} values but the tree has {leaves} leaves"
            ));
        }
    }

    Ok(LoadedInstance { tree, v, w1, w2, exps, f, g, file })
}

/// Read and materialize an instance file from disk.
pub fn read_instance(path: &Path, flag_p1: f64, flag_p2: f64) -> Result<LoadedInstance, String> {
    let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file: InstanceFile = serde_json::from_slice(&bytes)
        .map_err(|e| format!("cannot parse {}: {e}", path.display()))?;
    load_instance(file, flag_p1, flag_p2)
}

/// A synthetic unit instance: uniform dyadic tree of the given depth,
/// unit weights, constant-one functions.
pub fn unit_instance(depth: usize, p1: f64, p2: f64) -> Result<LoadedInstance, String> {
    let tree: FiltrationTree<f64> =
        FiltrationTree::build_dyadic(depth, None).map_err(|e| format!("depth {depth}: {e}"))?;
    let file = instance_to_file(
        &tree,
        &Weight::ones(tree.leaf_count()),
        &Weight::ones(tree.leaf_count()),
        &Weight::ones(tree.leaf_count()),
        p1,
        p2,
        &SimpleFunction::constant(1.0, tree.leaf_count()),
        &SimpleFunction::constant(1.0, tree.leaf_count()),
    );
    load_instance(file, p1, p2)
}

/// Serialize runtime data back into the file schema (floats throughout).
#[allow(clippy::too_many_arguments)]
pub fn instance_to_file(
    tree: &FiltrationTree<f64>,
    v: &Weight<f64>,
    w1: &Weight<f64>,
    w2: &Weight<f64>,
    p1: f64,
    p2: f64,
    f: &SimpleFunction<f64>,
    g: &SimpleFunction<f64>,
) -> InstanceFile {
    let nums = |xs: &[f64]| xs.iter().map(|&x| Num::F(x)).collect::<Vec<_>>();
    InstanceFile {
        tree: TreeFile { masses: nums(tree.masses()), levels: tree.levels().to_vec() },
        weights: Some(WeightsFile {
            v: nums(v.values()),
            w1: nums(w1.values()),
            w2: nums(w2.values()),
        }),
        exponents: Some(ExponentsFile { p1, p2 }),
        functions: Some(FunctionsFile { f: nums(f.values()), g: nums(g.values()) }),
    }
}

/// Write a report atomically: to a sibling temp file first, then rename,
/// so a crash never leaves a partial report at the target path.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "report".into());
    name.push(format!(".tmp-{}", std::process::id()));
    let tmp = path.with_file_name(name);
    fs::write(&tmp, bytes)?;
    match fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}
