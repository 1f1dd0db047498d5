//! Coalition formation games with additively separable and fractional
//! utilities: strategyproof mechanisms, a brute-force welfare oracle,
//! instance generators, and an empirical verifier for strategyproofness,
//! acceptability and approximation ratios.
//!
//! The numeric core is generic over [`Scalar`]; the concrete aliases below
//! fix it to exact rationals, which is what the CLI, the file format and
//! the test suite use throughout — verdicts and tie-breaks never depend on
//! rounding.
//!
//! Everything is a pure function of its inputs: values are immutable after
//! construction, there is no interior mutability anywhere, and all types
//! can be shared and evaluated concurrently.

pub mod game;
pub mod instances;
pub mod matching;
pub mod mechanisms;
pub mod oracle;
pub mod repro;
pub mod rng;
pub mod scalar;
pub mod verify;

pub use game::{Agent, Coalition, GameKind, Partition, ValuationClass, ValuationProfile};
pub use scalar::Scalar;

use thiserror::Error;

/// Exact rational scalar: arbitrary-precision numerator and denominator.
pub type Rational = num_rational::BigRational;

/// Exact-rational valuation profile.
pub type Profile = game::ValuationProfile<Rational>;

/// Exact-rational weighted graph.
pub type Graph = matching::UndirectedWeightedGraph<Rational>;

/// Exact-rational labeled instance.
pub type Instance = instances::Instance<Rational>;

/// An exhaustive routine was asked to run beyond its size guard.
#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("{what}: instance too large (limit {limit}, requested {requested})")]
pub struct GuardError {
    pub what: &'static str,
    pub limit: usize,
    pub requested: usize,
}

/// An operation was invoked on a valuation class it is not defined for.
#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("{operation} is not defined for {class} profiles")]
pub struct WrongClassError {
    pub operation: &'static str,
    pub class: game::ValuationClass,
}
