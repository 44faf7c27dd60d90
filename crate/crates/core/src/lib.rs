//! Entropic constraints of classical-quantum causal structures.
//!
//! The crate turns a causal structure into a system of linear entropy
//! constraints, projects it onto observable marginals by exact Fourier–Motzkin
//! elimination, verifies candidate inequalities with an exact rational LP that
//! returns replayable certificates, and evaluates inequalities on explicit
//! probability distributions.

pub mod rational;
pub mod sets;
pub mod model;
pub mod expr;
pub mod cone;
pub mod verify;
pub mod polyhedron;
pub mod dist;
pub mod scenarios;
