//! Approval-based committee elections with exact arithmetic.
//!
//! The crate implements Proportional Approval Voting, Phragmén's sequential
//! rule and Rule X, together with checkers for proportionality axioms
//! (priceability, laminar proportionality, PJR, EJR, the core and its
//! relaxations, Pigou–Dalton and Pareto efficiency).

pub mod axioms;
pub mod cli;
pub mod error;
pub mod exactmath;
pub mod generators;
pub mod model;
pub mod rational;
pub mod rules;

pub use error::{Error, ParseError, Result};
pub use model::{Committee, ElectionInstance, WelfareVector};
pub use rational::Rational;
