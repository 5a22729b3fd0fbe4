//! Error type shared by every fallible operation in the crate.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong when building spaces, evaluating operators,
/// or running verification suites.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A leaf mass is zero or negative.
    NonPositiveMass { leaf: usize },
    /// Leaf masses do not sum to one (exactly in rational mode, within
    /// tolerance in float mode).
    MassSumNotOne,
    /// A sequence has the wrong length for the tree it is paired with.
    BadLength { expected: usize, got: usize },
    /// Level index outside `0..=N`.
    LevelOutOfRange { level: usize, max: usize },
    /// A function or weight does not have one value per leaf.
    LeafCountMismatch { expected: usize, got: usize },
    /// A weight has a zero or negative entry.
    NonPositiveWeight { leaf: usize },
    /// An exponent lies outside its admissible range.
    ExponentOutOfRange { value: f64 },
    /// A leaf index is out of bounds.
    IndexOutOfRange { index: usize, len: usize },
    /// A per-level condition is not constant on the atoms of its level.
    NotAdapted { level: usize, atom: usize },
    /// A leaf assignment violates the stopping-time measurability invariant.
    InvalidStoppingTime { level: usize, atom: usize },
    /// The stopping-time count exceeds the enumeration cap.
    TooManyStoppingTimes { count: u128, cap: u128 },
    /// Exact subset enumeration was requested above the leaf cap.
    CapExceeded { leaves: usize, cap: usize },
    /// A ratio with a zero denominator was requested.
    ZeroDenominator,
    /// An operation over an empty family of functions.
    EmptyFamily,
    /// Input is degenerate for the requested decomposition.
    DegenerateInput(&'static str),
    /// A generator or search configuration is invalid.
    BadSpec(String),
    /// A search objective could not be evaluated on an instance.
    ObjectiveEvaluationFailure(&'static str),
    /// The proposed partitions do not form a filtration tree.
    InvalidTree(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonPositiveMass { leaf } => write!(f, "mass of leaf {leaf} is not strictly positive"),
            Error::MassSumNotOne => write!(f, "leaf masses do not sum to 1"),
            Error::BadLength { expected, got } => write!(f, "expected length {expected}, got {got}"),
            Error::LevelOutOfRange { level, max } => write!(f, "level {level} outside 0..={max}"),
            Error::LeafCountMismatch { expected, got } => {
                write!(f, "function has {got} values but the tree has {expected} leaves")
            }
            Error::NonPositiveWeight { leaf } => write!(f, "weight at leaf {leaf} is not strictly positive"),
            Error::ExponentOutOfRange { value } => write!(f, "exponent {value} outside its admissible range"),
            Error::IndexOutOfRange { index, len } => write!(f, "leaf index {index} out of range for {len} leaves"),
            Error::NotAdapted { level, atom } => {
                write!(f, "condition at level {level} is not constant on atom {atom}")
            }
            Error::InvalidStoppingTime { level, atom } => {
                write!(f, "assignment splits atom {atom} of level {level}")
            }
            Error::TooManyStoppingTimes { count, cap } => {
                write!(f, "stopping-time count {count} exceeds cap {cap}")
            }
            Error::CapExceeded { leaves, cap } => {
                write!(f, "exact mode needs leaf count <= {cap}, got {leaves}")
            }
            Error::ZeroDenominator => write!(f, "denominator is zero"),
            Error::EmptyFamily => write!(f, "empty function family"),
            Error::DegenerateInput(why) => write!(f, "degenerate input: {why}"),
            Error::BadSpec(why) => write!(f, "bad generator config: {why}"),
            Error::ObjectiveEvaluationFailure(why) => write!(f, "objective evaluation failed: {why}"),
            Error::InvalidTree(why) => write!(f, "invalid tree: {why}"),
        }
    }
}
