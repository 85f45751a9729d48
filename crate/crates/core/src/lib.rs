//! Quantum information numerics for string-commitment trade-offs.
//!
//! Dense states live in [`state`]; the measures in [`measures`] and the
//! diagonal fast path in [`classical`]. The constructions used by the
//! cheating strategy are in [`substate`] and [`transition`], the protocol
//! simulator in [`protocol`], and the strategy itself in [`attack`].
//! [`corpus`] holds the reference protocols and [`experiments`] the
//! separation and repetition studies.

pub mod attack;
pub mod bits;
pub mod classical;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod measures;
pub mod protocol;
pub mod random;
pub mod registers;
pub mod state;
pub mod substate;
pub mod transition;

pub use error::{Error, Result};
