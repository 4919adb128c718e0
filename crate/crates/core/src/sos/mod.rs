//! Operational semantics over configurations `<P, rho>`.

mod enabled;
mod key;
mod lts;
mod step;

use thiserror::Error;

use crate::ast::{AstError, Process};
use crate::qnum::{QState, QnumError};

pub use enabled::{enabled, input_targets, FreshPolicy, Transition};
pub use key::{process_key, ConfigKey, OpRegistry};
pub use lts::{build_lts, Lts, LtsBounds, LtsNode};
pub use step::{steps, unfold_const, Abstraction, Move, Steps};

#[derive(Debug, Clone, Error)]
pub enum SosError {
    #[error(transparent)]
    Ast(#[from] AstError),
    #[error(transparent)]
    Qnum(#[from] QnumError),
    #[error("unguarded recursion through `{0}`")]
    UnguardedRecursion(String),
    #[error("no variable of type {ty} available to receive on `{chan}`")]
    NoTarget { chan: String, ty: String },
    #[error("internal error: {0}")]
    Internal(String),
}

/// A process together with the state of the register it runs against.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub process: Process,
    pub state: QState,
}

impl Configuration {
    pub fn new(process: Process, state: QState) -> Self {
        Configuration { process, state }
    }
}

#[cfg(test)]
mod tests;
