use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::eigen::eigvalsh;
use super::matrix::{subsystem_permutation, ComplexMatrix, C64};
use super::register::{Register, VarType};
use super::{QnumError, TOL_H};
use crate::names::Var;

/// Grid used to deduplicate states: entries are rounded to multiples of it.
pub const STATE_GRID: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Density,
    Partial,
}

/// A (partial) density operator over a register.
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    register: Register,
    matrix: ComplexMatrix,
    kind: TraceKind,
}

impl QState {
    /// Validated constructor: Hermitian, positive semidefinite and with the
    /// trace bound of `kind`, all within [`TOL_H`].
    pub fn new(register: Register, matrix: ComplexMatrix, kind: TraceKind) -> Result<Self, QnumError> {
        let s = Self::from_parts(register, matrix, kind)?;
        s.validate(TOL_H)?;
        Ok(s)
    }

    /// Shape-checked constructor without the spectral checks. Used for states
    /// produced by operations that preserve the invariants.
    pub fn from_parts(register: Register, matrix: ComplexMatrix, kind: TraceKind) -> Result<Self, QnumError> {
        let d = register.total_dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(QnumError::Shape(format!(
                "state matrix is {}x{}, register {} needs {d}x{d}",
                matrix.rows(),
                matrix.cols(),
                register
            )));
        }
        Ok(QState {
            register,
            matrix,
            kind,
        })
    }

    pub fn pure(register: Register, amplitudes: &[C64]) -> Result<Self, QnumError> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOL_H {
            return Err(QnumError::InvalidState(format!("pure state has squared norm {norm}")));
        }
        Self::from_parts(register, ComplexMatrix::outer(amplitudes), TraceKind::Density)
    }

    /// Tensor product of factors, each a matrix over the listed variables in
    /// the listed order. The factors must cover the register exactly.
    pub fn product(
        register: Register,
        factors: &[(Vec<Var>, ComplexMatrix)],
    ) -> Result<Self, QnumError> {
        let mut listed: Vec<Var> = Vec::new();
        let mut matrix = ComplexMatrix::identity(1);
        for (vars, m) in factors {
            let d: usize = vars
                .iter()
                .map(|v| {
                    register
                        .type_of(v)
                        .map(|t| t.dim)
                        .ok_or_else(|| QnumError::UnknownVar(v.to_string()))
                })
                .product::<Result<usize, _>>()?;
            if m.rows() != d || m.cols() != d {
                return Err(QnumError::Shape(format!(
                    "factor on {vars:?} must be {d}x{d}, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
            listed.extend(vars.iter().cloned());
            matrix = matrix.kron(m);
        }
        if listed.len() != register.len() {
            return Err(QnumError::InvalidState(format!(
                "factors cover {} variables, register has {}",
                listed.len(),
                register.len()
            )));
        }
        let mut order = Vec::with_capacity(listed.len());
        for v in register.vars() {
            let pos = listed
                .iter()
                .position(|w| w == v)
                .ok_or_else(|| QnumError::InvalidState(format!("variable `{v}` has no factor")))?;
            order.push(pos);
        }
        let dims: Vec<usize> = listed
            .iter()
            .map(|v| register.type_of(v).map(|t| t.dim).unwrap_or(1))
            .collect();
        let map = subsystem_permutation(&dims, &order);
        Self::new(register, matrix.permute_indices(&map), TraceKind::Density)
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn validate(&self, tol: f64) -> Result<(), QnumError> {
        let herm = self.matrix.hermiticity_defect();
        if herm > tol {
            return Err(QnumError::InvalidState(format!("not Hermitian (defect {herm:.3e})")));
        }
        let min = eigvalsh(&self.matrix).first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(QnumError::InvalidState(format!(
                "not positive semidefinite (eigenvalue {min:.3e})"
            )));
        }
        let tr = self.trace();
        match self.kind {
            TraceKind::Density if (tr - 1.0).abs() > tol => {
                Err(QnumError::InvalidState(format!("density operator has trace {tr}")))
            }
            TraceKind::Partial if tr > 1.0 + tol => {
                Err(QnumError::InvalidState(format!("partial density operator has trace {tr}")))
            }
            _ => Ok(()),
        }
    }

    /// Traces out every variable not in `keep`.
    pub fn partial_trace(&self, keep: &[Var]) -> Result<QState, QnumError> {
        for v in keep {
            if !self.register.contains(v) {
                return Err(QnumError::UnknownVar(v.to_string()));
            }
        }
        let entries = self.register.entries();
        let kept: Vec<usize> = (0..entries.len()).filter(|&i| keep.contains(&entries[i].0)).collect();
        let traced: Vec<usize> = (0..entries.len()).filter(|i| !kept.contains(i)).collect();
        let dims = self.register.dims();
        let order: Vec<usize> = kept.iter().chain(&traced).copied().collect();
        let map = subsystem_permutation(&dims, &order);
        let permuted = self.matrix.permute_indices(&map);
        let dk: usize = kept.iter().map(|&i| dims[i]).product();
        let dt: usize = traced.iter().map(|&i| dims[i]).product();
        let mut out = ComplexMatrix::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..dk {
                out[(i, j)] = (0..dt).map(|t| permuted[(i * dt + t, j * dt + t)]).sum();
            }
        }
        let register = Register::new(kept.iter().map(|&i| entries[i].clone()))?;
        Self::from_parts(register, out, self.kind)
    }

    /// Renames register variables along `f` (pairs `old -> new`; variables not
    /// mentioned keep their name). The matrix is only re-indexed.
    pub fn rename(&self, f: &[(Var, Var)]) -> Result<QState, QnumError> {
        let map: BTreeMap<&Var, &Var> = f.iter().map(|(a, b)| (a, b)).collect();
        let entries = self.register.entries();
        let renamed: Vec<(Var, VarType)> = entries
            .iter()
            .map(|(v, t)| ((*map.get(v).unwrap_or(&v)).clone(), t.clone()))
            .collect();
        for (i, (v, t)) in renamed.iter().enumerate() {
            if renamed[..i].iter().any(|(w, _)| w == v) {
                return Err(QnumError::NotInjective(v.to_string()));
            }
            if let Some(own) = self.register.type_of(v) {
                // A target that is itself a register variable must keep its type.
                if own != t {
                    return Err(QnumError::TypeMismatch(format!(
                        "`{v}` has type {own}, cannot receive a {t}"
                    )));
                }
            }
        }
        let register = Register::new(renamed.clone())?;
        let order: Vec<usize> = register
            .vars()
            .map(|v| renamed.iter().position(|(w, _)| w == v).unwrap())
            .collect();
        let map = subsystem_permutation(&self.register.dims(), &order);
        Self::from_parts(register, self.matrix.permute_indices(&map), self.kind)
    }

    /// Tensors additional variables (given with their own states) onto this
    /// state.
    pub fn extend(&self, extra: &[(Var, VarType, ComplexMatrix)]) -> Result<QState, QnumError> {
        if extra.is_empty() {
            return Ok(self.clone());
        }
        let mut factors = vec![(self.register.vars().cloned().collect::<Vec<_>>(), self.matrix.clone())];
        let mut entries: Vec<(Var, VarType)> = self.register.entries().to_vec();
        for (v, t, m) in extra {
            entries.push((v.clone(), t.clone()));
            factors.push((vec![v.clone()], m.clone()));
        }
        let register = Register::new(entries)?;
        let kind = self.kind;
        let mut s = Self::product_unchecked(register, &factors)?;
        s.kind = kind;
        Ok(s)
    }

    fn product_unchecked(register: Register, factors: &[(Vec<Var>, ComplexMatrix)]) -> Result<Self, QnumError> {
        let mut listed = Vec::new();
        let mut matrix = ComplexMatrix::identity(1);
        for (vars, m) in factors {
            listed.extend(vars.iter().cloned());
            matrix = matrix.kron(m);
        }
        let order: Vec<usize> = register
            .vars()
            .map(|v| listed.iter().position(|w| w == v).unwrap())
            .collect();
        let dims: Vec<usize> = listed.iter().map(|v| register.type_of(v).unwrap().dim).collect();
        let map = subsystem_permutation(&dims, &order);
        Self::from_parts(register, matrix.permute_indices(&map), TraceKind::Density)
    }

    pub(crate) fn with_matrix(&self, matrix: ComplexMatrix, kind: TraceKind) -> QState {
        QState {
            register: self.register.clone(),
            matrix,
            kind,
        }
    }

    /// Entries rounded to [`STATE_GRID`], for deduplication.
    pub fn grid_key(&self) -> Vec<i64> {
        self.matrix
            .data()
            .iter()
            .flat_map(|z| [(z.re / STATE_GRID).round() as i64, (z.im / STATE_GRID).round() as i64])
            .collect()
    }

    /// Short stable digest of the rounded state.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for v in self.register.vars() {
            h.update(v.as_str().as_bytes());
            h.update([0]);
        }
        for k in self.grid_key() {
            h.update(k.to_le_bytes());
        }
        let digest = h.finalize();
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for QState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "state over {} (trace {:.6}, fp {})", self.register, self.trace(), self.fingerprint())
    }
}
