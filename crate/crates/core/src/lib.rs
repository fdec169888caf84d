//! Guided random walks on the square lattice and the homing sweep strategy.
//!
//! A walker receives a stream of compass instructions and follows each one
//! except with probability `p`, when it steps uniformly at random instead.
//! The crate provides exact distributions and a fast simulator for such
//! walks ([`lattice`]), the phase-based sweep instruction generator
//! ([`sweep`]), numerical threshold bounds on `p` ([`bounds`]) and a
//! reproducible Monte Carlo harness ([`montecarlo`]).

pub mod bounds;
pub mod lattice;
pub mod montecarlo;
pub mod seed;
pub mod sweep;
