//! Schedulability verification and parameter synthesis for preemptive
//! fixed-priority systems, built on parametric stopwatch automata.

pub mod automata;
pub mod dsl;
pub mod geometry;
pub mod model;
pub mod simulator;
pub mod synthesis;
