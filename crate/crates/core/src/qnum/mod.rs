//! Dense complex linear algebra and the quantum-information primitives used
//! by the calculus: registers, states, super-operators and distances.

pub mod distance;
pub mod eigen;
pub mod gates;
pub mod kets;
pub mod matrix;
pub mod random;
pub mod register;
pub mod state;
pub mod superop;

use thiserror::Error;

pub use distance::{diamond_distance, trace_distance, DiamondOptions};
pub use gates::{named_gate, GateRegistry};
pub use matrix::{ComplexMatrix, C64};
pub use register::{Register, VarType};
pub use state::{QState, TraceKind};
pub use superop::{apply_superop, measurement_superop, superop_compose, superop_equal, MeasureMode, Slot, SuperOp};

/// Validation tolerance for hermiticity, positivity and trace bounds.
pub const TOL_H: f64 = 1e-9;

/// Default tolerance for channel equality on Choi matrices.
pub const TOL_CHOI: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QnumError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("bad type: {0}")]
    BadType(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVar(String),
    #[error("register dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("map is not injective at `{0}`")]
    NotInjective(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid super-operator: {0}")]
    BadSuperOp(String),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("index {index} out of range for {len} operators")]
    IndexOutOfRange { index: usize, len: usize },
}
