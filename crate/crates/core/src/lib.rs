//! Search for harmonious labellings of free trees.
//!
//! The crate enumerates every free tree of a given size, labels each one
//! with a pipeline of randomized solvers, and re-checks every labelling with
//! an independent verifier before it is written out as a certificate.

pub mod backtrack;
pub mod certificate;
pub mod config;
pub mod enumerate;
pub mod error;
pub mod exhaustive;
pub mod hybrid;
pub mod labelling;
pub mod outcome;
pub mod sweep;
pub mod tabu;
pub mod tree;
pub mod twostage;
pub mod verify;
