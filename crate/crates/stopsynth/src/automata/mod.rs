//! Parametric stopwatch automata, networks with multi-party synchronization
//! and their symbolic semantics.

mod dump;
mod network;
mod semantics;

pub use network::{ActionId, Automaton, AutomatonBuilder, Edge, Location, LocationId, Network};
pub use semantics::SymbolicState;

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("automaton `{automaton}`: {message}")]
    Malformed { automaton: String, message: String },
    #[error("initial state is empty (inconsistent parameter domain or initial invariants)")]
    EmptyInitialState,
    #[error("parameter valuation lies outside the parameter domain")]
    ValuationOutsideDomain,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
