//! Finite-rank D-modules: presentations, connection matrices, flatness,
//! companion matrices, cyclic vectors and gauge transformations.
//!
//! A connection is stored as the matrices of the generators acting on a
//! basis, column convention: `(Omega_i)[k][j]` is the coefficient of basis
//! vector `k` in `eps d_i . basis_j`. A coefficient vector `v` then moves as
//! `v -> eps * d_i(v) + Omega_i v`.

mod connection;
mod presentation;

use thiserror::Error;

use crate::rings::RingError;
use crate::weyl::WeylError;

pub use connection::{
    companion, connection_from_presentation, connection_in_basis, cyclic_extract, ConnData, Cyclic, FlatnessReport,
    PairResidual,
};
pub use presentation::{MonomialChoice, Presentation, RelationChoice, Strategy, REDUCE_CAP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DmodError {
    #[error("a presentation needs at least one nonzero relation")]
    ZeroRelation,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("designated leading monomial does not occur in `{0}`")]
    LeadNotPresent(String),
    #[error("leading coefficient of `{0}` is not a unit")]
    NonUnitLead(String),
    #[error("leading monomial {0} divides leading monomial {1}")]
    RedundantLead(usize, usize),
    #[error("the presentation does not have finite rank")]
    InfiniteRank,
    #[error("non-terminating rewriting: more than {0} steps")]
    NonTerminating(usize),
    #[error("operator is not monic in the chosen direction")]
    NotMonic,
    #[error("matrix is not invertible over the coefficient field")]
    Singular,
    #[error("{0}")]
    Unverified(String),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Ring(#[from] RingError),
}
