use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::fv::free_vars;
use super::process::{ConstDef, Env, Process};
use crate::names::Var;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    /// `c!x.P` with `x` free in `P`.
    OutputClones { var: String },
    /// `P || Q` with a shared free variable.
    ParShares { vars: Vec<String> },
    UnknownConstant { name: String },
    Arity { name: String, expected: usize, found: usize },
    RepeatedArgument { var: String },
    ArgumentType { var: String, expected: String },
    UnknownVar { var: String },
    OpArity { op: String, expected: usize, found: usize },
    OpSlotType { op: String, var: String, expected: String },
    OpRepeatedVar { op: String, var: String },
    ParamsNotDistinct { name: String },
    FreeInDefinition { name: String, vars: Vec<String> },
}

/// A well-formedness failure and the offending subterm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    #[serde(flatten)]
    pub kind: ViolationKind,
    pub subterm: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ViolationKind::*;
        match &self.kind {
            OutputClones { var } => write!(f, "`{var}` is sent and still used afterwards")?,
            ParShares { vars } => write!(f, "parallel components share {}", vars.join(", "))?,
            UnknownConstant { name } => write!(f, "unknown constant `{name}`")?,
            Arity { name, expected, found } => {
                write!(f, "`{name}` takes {expected} arguments, given {found}")?
            }
            RepeatedArgument { var } => write!(f, "argument `{var}` repeated")?,
            ArgumentType { var, expected } => write!(f, "argument `{var}` should have type {expected}")?,
            UnknownVar { var } => write!(f, "undeclared variable `{var}`")?,
            OpArity { op, expected, found } => {
                write!(f, "`{op}` acts on {expected} variables, given {found}")?
            }
            OpSlotType { op, var, expected } => write!(f, "`{op}` expects `{var}` to have type {expected}")?,
            OpRepeatedVar { op, var } => write!(f, "`{op}` applied to `{var}` twice")?,
            ParamsNotDistinct { name } => write!(f, "parameters of `{name}` are not distinct")?,
            FreeInDefinition { name, vars } => {
                write!(f, "body of `{name}` has free variables {} outside its parameters", vars.join(", "))?
            }
        }
        write!(f, " in `{}`", self.subterm)
    }
}

/// Checks the no-cloning constraints, constant arity and typing. Children
/// are checked before their parent, left to right, so the first violation
/// reported is the leftmost-innermost one.
pub fn well_formed(p: &Process, env: &Env) -> Result<(), Violation> {
    check(p, env, &mut BTreeSet::new())
}

fn violation(kind: ViolationKind, p: &Process) -> Violation {
    Violation {
        kind,
        subterm: p.to_string(),
    }
}

fn known(v: &Var, env: &Env, bound: &BTreeSet<Var>, p: &Process) -> Result<(), Violation> {
    if env.type_of(v).is_none() && !bound.contains(v) {
        return Err(violation(ViolationKind::UnknownVar { var: v.to_string() }, p));
    }
    Ok(())
}

fn check(p: &Process, env: &Env, bound: &mut BTreeSet<Var>) -> Result<(), Violation> {
    match p {
        Process::Nil => Ok(()),
        Process::Const { name, args } => {
            for a in args {
                known(a, env, bound, p)?;
            }
            let def = env
                .constant(name)
                .ok_or_else(|| violation(ViolationKind::UnknownConstant { name: name.to_string() }, p))?;
            if def.params.len() != args.len() {
                return Err(violation(
                    ViolationKind::Arity {
                        name: name.to_string(),
                        expected: def.params.len(),
                        found: args.len(),
                    },
                    p,
                ));
            }
            let mut seen = BTreeSet::new();
            for (a, x) in args.iter().zip(&def.params) {
                if !seen.insert(a) {
                    return Err(violation(ViolationKind::RepeatedArgument { var: a.to_string() }, p));
                }
                let (ta, tx) = (env.type_of(a), env.type_of(x));
                if ta.is_some() && ta != tx {
                    return Err(violation(
                        ViolationKind::ArgumentType {
                            var: a.to_string(),
                            expected: tx.map(|t| t.name).unwrap_or_default(),
                        },
                        p,
                    ));
                }
            }
            Ok(())
        }
        Process::Tau(b) | Process::Restrict(b, _) => check(b, env, bound),
        Process::Op { op, vars, body } => {
            check(body, env, bound)?;
            let label = op.label().to_string();
            if vars.len() != op.domain().len() {
                return Err(violation(
                    ViolationKind::OpArity {
                        op: label,
                        expected: op.domain().len(),
                        found: vars.len(),
                    },
                    p,
                ));
            }
            let mut seen = BTreeSet::new();
            for (v, slot) in vars.iter().zip(op.domain()) {
                known(v, env, bound, p)?;
                if !seen.insert(v) {
                    return Err(violation(ViolationKind::OpRepeatedVar { op: label, var: v.to_string() }, p));
                }
                if let Some(t) = env.type_of(v) {
                    if t.dim != slot.ty.dim || t.name != slot.ty.name {
                        return Err(violation(
                            ViolationKind::OpSlotType {
                                op: label,
                                var: v.to_string(),
                                expected: slot.ty.name.clone(),
                            },
                            p,
                        ));
                    }
                }
            }
            Ok(())
        }
        Process::Input { var, body, .. } => {
            if env.type_of(var).is_none() {
                return Err(violation(ViolationKind::UnknownVar { var: var.to_string() }, p));
            }
            let fresh = bound.insert(var.clone());
            let r = check(body, env, bound);
            if fresh {
                bound.remove(var);
            }
            r
        }
        Process::Output { var, body, .. } => {
            check(body, env, bound)?;
            known(var, env, bound, p)?;
            if free_vars(body).contains(var) {
                return Err(violation(ViolationKind::OutputClones { var: var.to_string() }, p));
            }
            Ok(())
        }
        Process::Sum(a, b) => {
            check(a, env, bound)?;
            check(b, env, bound)
        }
        Process::Par(a, b) => {
            check(a, env, bound)?;
            check(b, env, bound)?;
            let shared: Vec<String> = free_vars(a)
                .intersection(&free_vars(b))
                .map(|v| v.to_string())
                .collect();
            if !shared.is_empty() {
                return Err(violation(ViolationKind::ParShares { vars: shared }, p));
            }
            Ok(())
        }
    }
}

/// Checks a defining equation: distinct typed parameters, a well-formed
/// body and `fv(body) ⊆ params`.
pub fn check_const_def(def: &ConstDef, env: &Env) -> Result<(), Violation> {
    let head = Process::constant(&def.name, def.params.clone());
    let distinct: BTreeSet<&Var> = def.params.iter().collect();
    if distinct.len() != def.params.len() {
        return Err(violation(ViolationKind::ParamsNotDistinct { name: def.name.clone() }, &head));
    }
    for x in &def.params {
        if env.type_of(x).is_none() {
            return Err(violation(ViolationKind::UnknownVar { var: x.to_string() }, &head));
        }
    }
    well_formed(&def.body, env)?;
    let outside: Vec<String> = free_vars(&def.body)
        .into_iter()
        .filter(|v| !def.params.contains(v))
        .map(|v| v.to_string())
        .collect();
    if !outside.is_empty() {
        return Err(violation(
            ViolationKind::FreeInDefinition {
                name: def.name.clone(),
                vars: outside,
            },
            &def.body,
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::Chan;
    use crate::qnum::VarType;

    fn env() -> Env {
        let mut e = Env::new();
        for v in ["x", "y"] {
            e.declare_var(Var::new(v), VarType::qubit());
        }
        e
    }

    fn out(c: &str, x: &str, p: Process) -> Process {
        Process::output(Chan::new(c), Var::new(x), p)
    }

    #[test]
    fn output_clone_reported_at_outer_prefix() {
        let p = out("c", "x", out("c", "x", Process::nil()));
        let err = well_formed(&p, &env()).unwrap_err();
        assert_eq!(err.kind, ViolationKind::OutputClones { var: "x".into() });
        assert_eq!(err.subterm, "c!x.c!x.nil");
    }

    #[test]
    fn shared_variable_under_par() {
        let p = Process::par(out("c", "x", Process::nil()), out("d", "x", Process::nil()));
        assert!(matches!(
            well_formed(&p, &env()).unwrap_err().kind,
            ViolationKind::ParShares { .. }
        ));
        let c = Chan::new("c");
        let ok = Process::par(
            Process::input(c.clone(), Var::new("x"), out("c", "x", Process::nil())),
            out("c", "y", Process::nil()),
        );
        assert!(well_formed(&ok, &env()).is_ok());
    }

    #[test]
    fn sums_may_share() {
        let p = Process::sum(out("c", "x", Process::nil()), out("d", "x", Process::nil()));
        assert!(well_formed(&p, &env()).is_ok());
    }

    #[test]
    fn leftmost_innermost_first() {
        let bad_left = Process::par(out("c", "x", Process::nil()), out("d", "x", Process::nil()));
        let bad_right = out("c", "y", out("c", "y", Process::nil()));
        let p = Process::sum(bad_left, bad_right);
        assert!(matches!(
            well_formed(&p, &env()).unwrap_err().kind,
            ViolationKind::ParShares { .. }
        ));
    }

    #[test]
    fn definitions() {
        let mut e = env();
        let def = ConstDef {
            name: "A".into(),
            params: vec![Var::new("y")],
            body: Process::input(Chan::new("c"), Var::new("x"), out("c", "x", Process::constant("A", vec![Var::new("y")]))),
        };
        e.consts.insert("A".into(), def.clone());
        assert!(check_const_def(&def, &e).is_ok());
        let bad = ConstDef {
            name: "B".into(),
            params: vec![],
            body: out("c", "x", Process::nil()),
        };
        e.consts.insert("B".into(), bad.clone());
        assert!(matches!(
            check_const_def(&bad, &e).unwrap_err().kind,
            ViolationKind::FreeInDefinition { .. }
        ));
        let p = Process::constant("A", vec![Var::new("x"), Var::new("y")]);
        assert!(matches!(well_formed(&p, &e).unwrap_err().kind, ViolationKind::Arity { .. }));
    }
}
