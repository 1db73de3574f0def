//! Greedy construction and exact verification of `B_h[g]` sequences.
//!
//! A set `A` of positive integers is `B_h[g]` when every integer is a sum of
//! `h` elements of `A` (repetition allowed, order ignored) in at most `g`
//! ways. This crate builds such sequences greedily, keeps every
//! representation count exact, and re-checks the results independently.

pub mod error;
pub mod greedy;
pub mod sumrep;
pub mod threshold;
pub mod verify;

pub use error::{Error, Result};
pub use greedy::{
    classic_greedy, generate, is_strong_candidate, strong_greedy, Algorithm, GreedyOptions, Params,
    Rejection, SequenceRecord, StepMeta, Verdict,
};
pub use sumrep::{brute_force_rep, CandidateDelta, RepProfile, SumTableSet};
pub use threshold::{greedy_bound, threshold_leq, Threshold};
