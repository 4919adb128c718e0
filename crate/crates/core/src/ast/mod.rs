//! Process terms and their syntactic theory: free variables, substitution,
//! α-conversion and well-formedness.

mod action;
mod alpha;
mod fv;
mod pretty;
mod process;
mod subst;
mod wf;

use thiserror::Error;

pub use action::{bv_action, cn_action, fv_action, Action};
pub use alpha::{alpha_eq, canonicalize, sorted_prefix};
pub use fv::{free_channels, free_vars, fv};
pub use pretty::pretty;
pub use process::{ConstDef, Env, Process};
pub use subst::{apply_unchecked, subst_apply, Subst};
pub use wf::{check_const_def, well_formed, Violation, ViolationKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AstError {
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("invalid substitution: {0}")]
    BadSubst(String),
    #[error("substitution is not well-defined: {0}")]
    IllDefinedSubst(String),
    #[error("{0}")]
    WellFormed(Violation),
}
