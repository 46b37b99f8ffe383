//! Exact linear-constraint geometry over clocks and parameters.

mod constraint;
pub mod fm;
mod int;
mod polyhedron;
mod rational;
mod region;
mod registry;

pub use constraint::{ConstraintDoc, LinExpr, LinearConstraint, Rel};
pub use int::Int;
pub use polyhedron::{Point, Polyhedron, Universe};
pub use rational::Rational;
pub use region::{difference, region_complement, region_equal, Region, RegionDoc};
pub use registry::{Registry, VarId, VarKind};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("polyhedra range over different variable universes")]
    UniverseMismatch,
    #[error("variable {0:?} is not part of the universe")]
    VariableOutsideUniverse(VarId),
    #[error("variable {0:?} is not a clock")]
    NotAClock(VarId),
    #[error("no value given for variable {0:?}")]
    MissingValue(VarId),
    #[error("negative value for parameter {0:?}")]
    NegativeValuation(VarId),
    #[error("variable name `{0}` registered twice")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed rational literal `{0}`")]
    ParseRational(String),
}
