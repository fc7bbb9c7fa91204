//! Exact polynomial algebra for the restricted critical-point systems:
//! multivariate arithmetic over Q, reduced lex Groebner bases, certified
//! real-root isolation, and symbolic restriction of the poly-kernel loss to
//! the S_d x S_d and Delta S_d fixed-point subspaces.

mod groebner;
mod poly;
mod restrict;
mod roots;

pub use groebner::{groebner_lex, reduce, GroebnerCaps};
pub use poly::{Exponents, MultiPoly};
pub use restrict::{
    restrict_loss_symbolic, restricted_partials, solve_restricted, RestrictedReport,
    RestrictedSolution, RestrictionSpec, DELTA_SD_VARS, RESIDUAL_TOL, SD_SD_VARS,
};
pub use roots::{rat_to_f64, real_roots, simplest_in_interval, IsolatedRoot, UniPoly};

#[derive(Debug, thiserror::Error)]
pub enum AlgebraError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("variable mismatch: {0}")]
    VarMismatch(String),
    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("degenerate specialization: {0}")]
    Degenerate(String),
}
