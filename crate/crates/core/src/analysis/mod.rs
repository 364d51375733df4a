//! Static checks on STV programs and their size bounds.

mod bound;
mod prbound;
mod stv;

use thiserror::Error;

use crate::interp::RunError;

pub use bound::{
    bound, bound_of, bound_of_block, eval_bound, eval_bound_u64, literal_bound, literal_bound_of, BoundFunction,
    BoundValue,
};
pub use prbound::{check_pr_bound, located_preorder, Falsification, PrBoundOptions, PrBoundReport};
pub use stv::{check_stv, StvReport, Violation, ViolationKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("not an STV program: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    NotStv(Vec<Violation>),
    #[error(transparent)]
    Run(#[from] RunError),
}
