use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use super::matrix::{c, ComplexMatrix, C64};
use super::superop::{Slot, SuperOp};
use super::QnumError;

/// Matrix of a builtin gate, or `None` if the name is unknown.
pub fn builtin_matrix(name: &str) -> Option<ComplexMatrix> {
    let s = FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let m = match name {
        "I" => ComplexMatrix::identity(2),
        "H" => ComplexMatrix::from_real(2, &[s, s, s, -s]),
        "X" => ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]),
        "Y" => ComplexMatrix::from_rows(vec![vec![z, c(0.0, -1.0)], vec![c(0.0, 1.0), z]]).ok()?,
        "Z" => ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]),
        "S" => ComplexMatrix::diagonal(&[o, c(0.0, 1.0)]),
        "T" => ComplexMatrix::diagonal(&[o, C64::from_polar(1.0, FRAC_PI_4)]),
        #[rustfmt::skip]
        "CNOT" => ComplexMatrix::from_real(4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 1.0, 0.0,
        ]),
        #[rustfmt::skip]
        "SWAP" => ComplexMatrix::from_real(4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ]),
        "CZ" => ComplexMatrix::diagonal(&[o, o, o, c(-1.0, 0.0)]),
        _ => return None,
    };
    Some(m)
}

/// `Rz(theta) = diag(e^{-i theta/2}, e^{i theta/2})`.
pub fn rz(theta: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[
        C64::from_polar(1.0, -theta / 2.0),
        C64::from_polar(1.0, theta / 2.0),
    ])
}

pub fn builtin_names() -> &'static [&'static str] {
    &["I", "H", "X", "Y", "Z", "S", "T", "CNOT", "SWAP", "CZ"]
}

/// Builtin gate as a unitary channel on `domain`.
pub fn named_gate(name: &str, domain: Vec<Slot>) -> Result<SuperOp, QnumError> {
    let m = builtin_matrix(name).ok_or_else(|| QnumError::UnknownGate(name.to_string()))?;
    SuperOp::unitary(domain, m, name)
}

/// Builtin gates plus user-registered unitaries.
#[derive(Clone, Debug, Default)]
pub struct GateRegistry {
    user: BTreeMap<String, ComplexMatrix>,
}

impl GateRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &str, u: ComplexMatrix) -> Result<(), QnumError> {
        if !u.is_square() {
            return Err(QnumError::Shape(format!("gate `{name}` is not square")));
        }
        let n = u.rows();
        if u.adjoint().mul(&u).max_abs_diff(&ComplexMatrix::identity(n)) > super::TOL_H {
            return Err(QnumError::BadSuperOp(format!("gate `{name}` is not unitary")));
        }
        self.user.insert(name.to_string(), u);
        Ok(())
    }

    pub fn matrix(&self, name: &str) -> Option<ComplexMatrix> {
        self.user.get(name).cloned().or_else(|| builtin_matrix(name))
    }

    pub fn gate(&self, name: &str, domain: Vec<Slot>) -> Result<SuperOp, QnumError> {
        let m = self.matrix(name).ok_or_else(|| QnumError::UnknownGate(name.to_string()))?;
        SuperOp::unitary(domain, m, name)
    }
}
