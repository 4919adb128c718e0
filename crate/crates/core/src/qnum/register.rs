use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::QnumError;
use crate::names::Var;

/// Default cap on the total Hilbert-space dimension of a register.
pub const DEFAULT_DIM_CAP: usize = 1 << 12;

/// A quantum type: every variable of the type lives in a space of `dim`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VarType {
    pub name: String,
    pub dim: usize,
}

impl VarType {
    pub fn new(name: &str, dim: usize) -> Result<Self, QnumError> {
        if dim < 2 {
            return Err(QnumError::BadType(format!(
                "type `{name}` must have dimension at least 2, got {dim}"
            )));
        }
        Ok(VarType {
            name: name.to_string(),
            dim,
        })
    }

    pub fn qubit() -> Self {
        VarType {
            name: "qubit".into(),
            dim: 2,
        }
    }
}

impl fmt::Display for VarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// An ordered, finite list of typed variables. Variables are kept in
/// lexicographic order so that states over the same variable set are
/// comparable entrywise.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Register {
    vars: Vec<(Var, VarType)>,
}

impl Register {
    pub fn empty() -> Self {
        Register { vars: Vec::new() }
    }

    pub fn new(vars: impl IntoIterator<Item = (Var, VarType)>) -> Result<Self, QnumError> {
        Self::with_cap(vars, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(
        vars: impl IntoIterator<Item = (Var, VarType)>,
        cap: usize,
    ) -> Result<Self, QnumError> {
        let mut map = BTreeMap::new();
        for (v, ty) in vars {
            if ty.dim < 2 {
                return Err(QnumError::BadType(format!("variable `{v}` has dimension {}", ty.dim)));
            }
            if map.insert(v.clone(), ty).is_some() {
                return Err(QnumError::DuplicateVar(v.to_string()));
            }
        }
        let reg = Register {
            vars: map.into_iter().collect(),
        };
        let mut total: usize = 1;
        for (_, ty) in &reg.vars {
            total = total.saturating_mul(ty.dim);
        }
        if total > cap {
            return Err(QnumError::TooLarge { dim: total, cap });
        }
        Ok(reg)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn entries(&self) -> &[(Var, VarType)] {
        &self.vars
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.vars.iter().map(|(v, _)| v)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.vars.iter().map(|(_, t)| t.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.vars.iter().map(|(_, t)| t.dim).product()
    }

    pub fn position(&self, v: &Var) -> Option<usize> {
        self.vars.binary_search_by(|(w, _)| w.cmp(v)).ok()
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.position(v).is_some()
    }

    pub fn type_of(&self, v: &Var) -> Option<&VarType> {
        self.position(v).map(|i| &self.vars[i].1)
    }

    /// Variables of the given type, in register order.
    pub fn vars_of_type<'a>(&'a self, ty: &'a VarType) -> impl Iterator<Item = &'a Var> + 'a {
        self.vars.iter().filter(move |(_, t)| t == ty).map(|(v, _)| v)
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}:{t}")?;
        }
        write!(f, "}}")
    }
}
