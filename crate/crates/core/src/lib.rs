//! Martingale weighted-inequality toolkit on finite filtered probability
//! spaces.
//!
//! The space is a refinement tree: a finite leaf set with positive masses
//! summing to 1, filtered by partitions `P_0 ⊆ … ⊆ P_N` (coarse to fine,
//! singletons last). On it the crate computes, exactly where the arithmetic
//! allows and in `f64` elsewhere:
//!
//! - conditional expectations `E_n`, `E_n^v` and the martingales they
//!   generate ([`tree`]);
//! - weighted strong and weak `L^p` norms ([`func`]);
//! - Doob, bisublinear and multisublinear maximal operators and their
//!   weighted variants ([`maximal`]);
//! - stopping times, hitting times, stopped values, and exhaustive
//!   antichain enumeration ([`stopping`]);
//! - the weight-condition constants `RH(p1,p2)`, `A_p⃗`, `S_p⃗` and their
//!   linear couple specializations `A_p`, `S_p` ([`conditions`]);
//! - step-by-step verification of the weak-type equivalence chain, the
//!   Sawyer stopping-time decomposition and the strong-type bound, the
//!   one-weight suite, and martingale convergence ([`theorem`]);
//! - seeded random instances and derivative-free search for extremal
//!   weights ([`search`]).
//!
//! The crate is `no_std` (with `alloc`); everything IO-related lives in the
//! companion CLI crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod conditions;
pub mod error;
pub mod func;
pub mod maximal;
pub mod sample;
pub mod scalar;
pub mod search;
pub mod stopping;
pub mod theorem;
pub mod tree;

pub use error::{Error, Result};
pub use func::{dual_weight, ExponentConfig, SimpleFunction, Weight};
pub use scalar::Scalar;
pub use tree::{AtomRef, FiltrationTree};
