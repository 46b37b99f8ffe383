//! Scheduling problems (threads, processings, reactivities) and their
//! translation into automata networks.

mod compile;
mod spec;
mod validate;

pub use compile::{
    compile, expand_free, CompileOptions, CompiledModel, Compiler, Home, ObserverCheck, MAX_THREADS,
};
pub use spec::{
    deadline_param, offset_param, rational_lcm, wcet_param, Endpoint, ProcessingSpec, Quantity,
    ReactivitySpec, Slot, SystemSpec, ThreadSpec,
};
pub use validate::{has_errors, validate, Diagnostic, Severity};

use thiserror::Error;

use crate::automata::AutomataError;
use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid specification: {}", .0.iter().filter(|d| d.severity == Severity::Error).map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("unknown reactivity `{0}`")]
    UnknownReactivity(String),
    #[error("processing `{0}` is not allocated to a thread")]
    Unallocated(String),
    #[error("{0} threads exceed the scheduler limit of {MAX_THREADS}")]
    TooManyThreads(usize),
    #[error("symbol `{0}` has more than one home")]
    SymbolTwice(String),
    #[error("symbol `{0}` has no home in the compiled model")]
    SymbolMissing(String),
    #[error("no value for parameter `{0}`")]
    MissingValue(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
