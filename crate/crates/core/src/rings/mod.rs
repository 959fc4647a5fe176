//! Commutative coefficient rings and the shared differential-ring contract.

mod diff;
pub mod linalg;
mod lpoly;
mod rfunc;
mod tseries;
mod vars;

use thiserror::Error;

pub use diff::{DiffField, DiffRing};
pub(crate) use lpoly::{fmt_scaled, join_terms};
pub use lpoly::{Exp, LPoly};
pub use rfunc::RFunc;
pub use tseries::{SeriesCtx, TSeries};
pub use vars::{DerivKind, Direction, VarTable, Vars};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown direction `{0}`")]
    UnknownDirection(String),
    #[error("variable `{0}` has no image in the target ring")]
    UnmappedVariable(String),
    #[error("negative power of `{0}` needs a unit-monomial image")]
    NegativePowerOfNonUnit(String),
    #[error("element is not a unit")]
    NotAUnit,
    #[error("values live over different variable tables")]
    VarTableMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
}
