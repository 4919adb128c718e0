use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::names::{Chan, Var};
use crate::qnum::{superop_equal, SuperOp};

/// A transition label.
#[derive(Clone)]
pub enum Action {
    Tau,
    /// `E[X]`, with `vars[i]` bound to slot `i`.
    Op { op: Arc<SuperOp>, vars: Vec<Var> },
    In(Chan, Var),
    Out(Chan, Var),
}

impl Action {
    pub fn is_op(&self) -> bool {
        matches!(self, Action::Op { .. })
    }

    /// Label equality; operation payloads are compared as channels with the
    /// variables sorted.
    pub fn matches(&self, other: &Action, tol: f64) -> bool {
        match (self, other) {
            (Action::Tau, Action::Tau) => true,
            (Action::In(c, x), Action::In(d, y)) | (Action::Out(c, x), Action::Out(d, y)) => c == d && x == y,
            (Action::Op { op: e, vars: xa }, Action::Op { op: f, vars: xb }) => {
                let (se, sa) = super::alpha::sorted_prefix(e, xa);
                let (sf, sb) = super::alpha::sorted_prefix(f, xb);
                sa == sb && (Arc::ptr_eq(e, f) && xa == xb || superop_equal(&se, &sf, tol).unwrap_or(false))
            }
            _ => false,
        }
    }
}

/// `fv(α)`: the sent variable of an output, `X` of an operation.
pub fn fv_action(a: &Action) -> BTreeSet<Var> {
    match a {
        Action::Out(_, x) => [x.clone()].into_iter().collect(),
        Action::Op { vars, .. } => vars.iter().cloned().collect(),
        Action::Tau | Action::In(..) => BTreeSet::new(),
    }
}

/// `bv(α)`: defined only for inputs.
pub fn bv_action(a: &Action) -> Option<&Var> {
    match a {
        Action::In(_, x) => Some(x),
        _ => None,
    }
}

/// `cn(α)`: defined only for communications.
pub fn cn_action(a: &Action) -> Option<&Chan> {
    match a {
        Action::In(c, _) | Action::Out(c, _) => Some(c),
        _ => None,
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => write!(f, "tau"),
            Action::Op { op, vars } => {
                write!(f, "{}[", op.label())?;
                for (i, v) in vars.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
            Action::In(c, x) => write!(f, "{c}?{x}"),
            Action::Out(c, x) => write!(f, "{c}!{x}"),
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::{named_gate, Slot, VarType};

    #[test]
    fn free_and_bound_names() {
        let q = VarType::qubit();
        let cnot = Arc::new(named_gate("CNOT", vec![Slot::new("a", q.clone()), Slot::new("b", q)]).unwrap());
        let a = Action::Op {
            op: cnot,
            vars: vec![Var::new("x"), Var::new("z")],
        };
        assert_eq!(fv_action(&a), [Var::new("x"), Var::new("z")].into_iter().collect());
        let inp = Action::In(Chan::new("c"), Var::new("x"));
        assert_eq!(bv_action(&inp), Some(&Var::new("x")));
        assert!(fv_action(&inp).is_empty());
        assert_eq!(cn_action(&Action::Tau), None);
        assert_eq!(bv_action(&Action::Tau), None);
        assert_eq!(a.to_string(), "CNOT[x,z]");
    }
}
