//! Twisted conjugacy in free groups via nilpotent quotients.
//!
//! Words and endomorphisms live in [`freegroup`]; [`foxcalc`] builds the
//! Reidemeister trace; [`hall`] collects words into Hall normal form;
//! [`decider`] runs the level-by-level test; [`nielsen`] counts classes of
//! trace terms; [`experiments`] runs seeded Monte Carlo trials.

pub mod cli;
pub mod decider;
pub mod experiments;
pub mod error;
pub mod foxcalc;
pub mod freegroup;
pub mod hall;
pub mod intlinalg;
pub mod nielsen;

pub use decider::{decide_doubly, decide_twisted, Decision, DeciderConfig, UndecidedReason, Verdict};
pub use error::{Error, Result};
pub use foxcalc::{fox_derivative, reidemeister_trace, GroupRingElement};
pub use freegroup::{Endomorphism, Letter, Word};
pub use hall::{witt_count, HallBasis, InducedMap, NilpotentElement};
pub use intlinalg::{smith_normal_form, solve_linear, IntegerMatrix, LinearSystem, SmithForm, SolutionSet};
pub use nielsen::{nielsen_number, pairwise_verdicts, NielsenResult, NielsenStatus};
